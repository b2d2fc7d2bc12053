"""kattn: attention-based relation extraction with lexical knowledge injection."""

__version__ = "0.1.0"

from .config import ModelConfig
from .estimator import RelationExtractor

__all__ = ["ModelConfig", "RelationExtractor", "__version__"]
