from .matplotlib_figure import MatplotlibFigure


class RdiProfile(MatplotlibFigure):
    """Relative damage of every element against its distance from the reservoir."""

    filename = 'rdi_profile.png'

    def figure_data(self, comparison):
        rows = []
        for result in comparison.results:
            if result.rdi is not None:
                rows.append((result.label, result.config.plant.positions, result.rdi))
        return rows

    def visualization(self, comparison, ax):
        for label, positions, rdi in self.figure_data(comparison):
            ax.plot(positions, rdi, marker='o', markersize=3, label=label)

        ax.set_ylim(bottom=0)
        ax.axhline(1.0, color='grey', linewidth=0.8, linestyle=':')

        self.set_axis_styling(ax, xlabel='distance from reservoir (m)', ylabel='RDI')
