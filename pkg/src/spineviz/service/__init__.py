from .app import ServerState, create_app, default_data_dir
from .cli import main

__all__ = ["ServerState", "create_app", "default_data_dir", "main"]
