"""
Configuration du package
"""
from setuptools import setup, find_packages

setup(
    name="persofed-simulator",
    version="1.0.0",
    description="Simulateur déterministe d'apprentissage fédéré personnalisé (famille PGFed et références)",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.24",
        "pandas>=2.0.3",
        "pyyaml>=6.0.1",
    ],
    extras_require={
        "test": [
            "pytest>=7.4",
        ]
    },
    entry_points={
        "console_scripts": [
            "persofed=cli.main:main",
        ],
    },
)
