from .cost import router as cost_router
from .runs import router as runs_router

__all__ = ["cost_router", "runs_router"]
