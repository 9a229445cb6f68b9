"""
Utilitaires: fichiers, hachage, logs
"""
from .helpers import FileUtils, HashUtils, format_duration
from .log import attach_file_handler, detach_handler, get_logger, setup_logging

__all__ = [
    'FileUtils', 'HashUtils', 'format_duration',
    'attach_file_handler', 'detach_handler', 'get_logger', 'setup_logging',
]
