"""
Configuration centralisée des logs
"""
import logging
import os
from typing import Optional

ROOT_LOGGER = "persofed"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def get_logger(name: str) -> logging.Logger:
    """Obtenir un logger rattaché à la racine du projet"""
    if name.startswith(ROOT_LOGGER):
        return logging.getLogger(name)
    return logging.getLogger(f"{ROOT_LOGGER}.{name}")


def setup_logging(level: Optional[str] = None) -> logging.Logger:
    """Installer le handler console (idempotent)"""
    root = logging.getLogger(ROOT_LOGGER)
    level_name = (level or os.environ.get("PERSOFED_LOG_LEVEL", "INFO")).upper()
    root.setLevel(getattr(logging, level_name, logging.INFO))

    if not any(getattr(h, "_persofed_console", False) for h in root.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._persofed_console = True
        root.addHandler(handler)
    return root


def attach_file_handler(path: str) -> logging.Handler:
    """Ajouter un fichier de log de run"""
    handler = logging.FileHandler(path, encoding="utf-8")
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logging.getLogger(ROOT_LOGGER).addHandler(handler)
    return handler


def detach_handler(handler: logging.Handler):
    """Retirer et fermer un handler"""
    logging.getLogger(ROOT_LOGGER).removeHandler(handler)
    handler.close()
