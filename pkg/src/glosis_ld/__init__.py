"""Soil linked-data toolkit for the GloSIS web ontology."""

from pathlib import Path

__version__ = "0.1.0"

DATA_DIR = Path(__file__).with_name("data")
FIXTURES_DIR = DATA_DIR / "fixtures"
SNIPPETS_DIR = DATA_DIR / "snippets"
MINI_GLOSIS_MANIFEST = DATA_DIR / "mini_glosis" / "mini_glosis.manifest"
NUTS_FIXTURE = FIXTURES_DIR / "nuts.ttl"
