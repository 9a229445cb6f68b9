"""
Fonctions utilitaires générales
"""
import hashlib
import json
import os
from typing import Any, Dict, Optional

from core.errors import OutputError


class FileUtils:
    """Utilitaires pour les fichiers"""

    @staticmethod
    def write_file_safe(file_path: str, content: str, encoding: str = 'utf-8'):
        """Écrire un fichier via un fichier temporaire puis renommage

        Lève ``OutputError`` si l'écriture échoue; aucun fichier partiel ne reste.
        """
        tmp_path = f"{file_path}.tmp"
        try:
            with open(tmp_path, 'w', encoding=encoding) as f:
                f.write(content)
            os.replace(tmp_path, file_path)
        except OSError as e:
            if os.path.exists(tmp_path):
                os.remove(tmp_path)
            raise OutputError(file_path, e) from e

    @staticmethod
    def unique_directory(parent: str, name: str) -> str:
        """Créer ``parent/name``, suffixé -1, -2, ... s'il existe déjà"""
        os.makedirs(parent, exist_ok=True)
        candidate = os.path.join(parent, name)
        suffix = 0
        while True:
            try:
                os.makedirs(candidate)
                return candidate
            except FileExistsError:
                suffix += 1
                candidate = os.path.join(parent, f"{name}-{suffix}")

    @staticmethod
    def inventory(directory: str, exclude: Optional[set] = None) -> Dict[str, Dict[str, Any]]:
        """Fichiers d'un dossier (récursif) avec taille et sha256"""
        exclude = exclude or set()
        files = {}
        for root, _, names in os.walk(directory):
            for name in sorted(names):
                path = os.path.join(root, name)
                relative = os.path.relpath(path, directory).replace(os.sep, "/")
                if relative in exclude:
                    continue
                files[relative] = {
                    "bytes": os.path.getsize(path),
                    "sha256": HashUtils.file_hash(path),
                }
        return dict(sorted(files.items()))


class HashUtils:
    """Utilitaires de hachage"""

    @staticmethod
    def sha256_hash(text: str) -> str:
        """Calculer le hash SHA256"""
        return hashlib.sha256(text.encode('utf-8')).hexdigest()

    @staticmethod
    def file_hash(file_path: str, algorithm: str = 'sha256') -> Optional[str]:
        """Calculer le hash d'un fichier"""
        try:
            hash_obj = hashlib.new(algorithm)
            with open(file_path, 'rb') as f:
                for chunk in iter(lambda: f.read(4096), b""):
                    hash_obj.update(chunk)
            return hash_obj.hexdigest()
        except (OSError, ValueError):
            return None

    @staticmethod
    def canonical_hash(data: Any) -> str:
        """Hash d'un document JSON canonique (clés triées, sans espaces)"""
        return HashUtils.sha256_hash(json.dumps(data, sort_keys=True, separators=(",", ":")))


def format_duration(seconds: float) -> str:
    """Formater une durée en secondes"""
    if seconds < 1:
        return f"{seconds*1000:.0f}ms"
    elif seconds < 60:
        return f"{seconds:.1f}s"
    elif seconds < 3600:
        minutes = int(seconds // 60)
        secs = int(seconds % 60)
        return f"{minutes}m {secs}s"
    else:
        hours = int(seconds // 3600)
        minutes = int((seconds % 3600) // 60)
        return f"{hours}h {minutes}m"
