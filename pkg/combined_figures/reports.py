from report_figures import LinearHeadTrace, RdiProfile, VaneTrace

from .figure_set import FigureSet


class RunReport(FigureSet):

    children = [VaneTrace()]


class ComparisonReport(FigureSet):

    children = [RdiProfile()]

    def call_children(self, comparison, out_dir):
        written = super().call_children(comparison, out_dir)

        # one vane figure per run, inside the run's own directory
        for result in comparison.results:
            run_dir = out_dir / result.label
            run_dir.mkdir(exist_ok=True)
            written.append(VaneTrace()(result, run_dir))

        return written


class FidelityFigures(FigureSet):

    children = [LinearHeadTrace(element=1), LinearHeadTrace()]
