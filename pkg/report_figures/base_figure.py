class BaseFigure:

    filename = 'figure.png'

    def build_figure(self, entity, out_dir):
        raise NotImplementedError

    def figure_data(self, entity):
        raise NotImplementedError

    def __call__(self, entity, out_dir):

        path = self.build_figure(entity, out_dir)

        return path
