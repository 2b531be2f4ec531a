from .matplotlib_figure import MatplotlibFigure


class LinearHeadTrace(MatplotlibFigure):
    """Nonlinear and linear-model head at one element under the same vane excursion."""

    def __init__(self, element=None):
        # 1-based; None picks the element next to the turbine
        self.element = element
        self.filename = f'linear_head_trace_{element}.png' if element else 'linear_head_trace_turbine.png'

    def figure_data(self, report):
        frame = report.frame
        element = self.element or report.relative_mae.size
        return element, frame['time_s'], frame[f'h_{element}'], frame[f'linear_h_{element}']

    def visualization(self, report, ax):
        element, time, nonlinear, linear = self.figure_data(report)

        ax.plot(time, nonlinear, label='nonlinear', linewidth=1.2)
        ax.plot(time, linear, label='linear model', linewidth=1.0, linestyle='--')

        self.set_axis_styling(ax, ylabel='head (m)', title=f'element {element}')
