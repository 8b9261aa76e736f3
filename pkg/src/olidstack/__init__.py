"""Multi-view stacked SVM classification for hierarchical offensive-language
detection on tweets."""

__version__ = "0.1.0"
