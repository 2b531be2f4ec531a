from .base_figure import BaseFigure
from .matplotlib_figure import MatplotlibFigure
from .head_trace import LinearHeadTrace
from .rdi_profile import RdiProfile
from .vane_trace import VaneTrace

__all__ = ['BaseFigure', 'MatplotlibFigure', 'LinearHeadTrace', 'RdiProfile', 'VaneTrace']
