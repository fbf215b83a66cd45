"""Optional matplotlib helper shared by the demo scripts."""

from pathlib import Path


def figure_or_none():
    try:
        import matplotlib
    except ImportError:
        print("matplotlib not installed; skipping the figure")
        return None
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def save(fig, name, out="demo_out"):
    Path(out).mkdir(exist_ok=True)
    path = Path(out) / name
    fig.savefig(path, dpi=120, bbox_inches="tight")
    print("wrote", path)
