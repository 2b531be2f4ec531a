from functools import wraps
from pathlib import Path

import matplotlib

# headless backend; figures only ever go to files
matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402

from .base_figure import BaseFigure  # noqa: E402

matplotlib.rcParams['savefig.format'] = 'png'
matplotlib.rcParams['savefig.dpi'] = 120


def matplotlib2png(func):
    '''
    Give the plotting method a fresh axis and save whatever it draws as
    <out_dir>/<filename>. The figure is closed afterwards so long sweeps do
    not accumulate open figures.
    '''
    @wraps(func)
    def wrapper(self, entity, out_dir):
        fig, ax = plt.subplots(figsize=self.figsize)

        func(self, entity, ax)

        path = Path(out_dir) / self.filename
        fig.tight_layout()
        fig.savefig(path)

        plt.close(fig)
        return path
    return wrapper


class MatplotlibFigure(BaseFigure):

    figsize = (8, 4)

    @matplotlib2png
    def build_figure(self, entity, ax):
        return self.visualization(entity, ax)

    def visualization(self, entity, ax):
        pass

    def set_axis_styling(self, ax, xlabel='time (s)', ylabel=None, title=None):

        ax.set_xlabel(xlabel)
        if ylabel:
            ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)

        ax.grid(True, alpha=0.3)
        if ax.get_legend_handles_labels()[0]:
            ax.legend(loc='best', fontsize='small')
