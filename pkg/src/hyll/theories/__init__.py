"""Bundled theory and process files, loadable by name from the cli."""
