from .figure_set import FigureSet
from .reports import ComparisonReport, FidelityFigures, RunReport

__all__ = ['FigureSet', 'ComparisonReport', 'FidelityFigures', 'RunReport']
