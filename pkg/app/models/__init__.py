from .fitness import FitnessCacheEntry

__all__ = ["FitnessCacheEntry"]
