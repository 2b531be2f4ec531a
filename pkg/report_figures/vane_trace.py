from .matplotlib_figure import MatplotlibFigure


class VaneTrace(MatplotlibFigure):
    """Governor set-point against the actuated opening."""

    filename = 'vane_trace.png'

    def figure_data(self, result):
        traces = result.traces
        return traces['time_s'], traces['y_star'], traces['y_applied']

    def visualization(self, result, ax):
        time, y_star, y_applied = self.figure_data(result)

        ax.plot(time, y_star, label='set-point y*', linewidth=1.0)
        ax.plot(time, y_applied, label='actuated y', linewidth=1.0, linestyle='--')
        ax.axvline(result.config.simulation.warmup, color='grey', linewidth=0.8, linestyle=':')

        self.set_axis_styling(ax, ylabel='opening (pu)', title=f'{result.label}: guide vane')
