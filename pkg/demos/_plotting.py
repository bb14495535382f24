"""Optional matplotlib output for the demos; silently skipped when unavailable."""
from pathlib import Path


def save_figure(fig_fn, name):
    try:
        import matplotlib
        matplotlib.use("Agg")
        from matplotlib import pyplot as plt
    except ImportError:
        return None
    fig = fig_fn(plt)
    path = Path(__file__).with_name(name)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    print(f"wrote {path}")
    return path
