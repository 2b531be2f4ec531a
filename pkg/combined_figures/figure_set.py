from pathlib import Path


class FigureSet:

    children = []

    def __call__(self, entity, out_dir):

        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

        return self.call_children(entity, out_dir)

    def call_children(self, entity, out_dir):

        written = []
        for child in self.children:
            written.append(child(entity, out_dir))

        return written
