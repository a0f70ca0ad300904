"""PNG figures of the distance and error-rate sweeps.

matplotlib is an optional dependency (``pip install artifact[plots]``); it is
imported only when a figure is rendered.
"""

from __future__ import annotations

from pathlib import Path

__all__ = ["render_figures", "matplotlib_available"]


def matplotlib_available() -> bool:
    try:
        import matplotlib  # noqa: F401
    except ImportError:
        return False
    return True


def _pyplot():
    try:
        import matplotlib
    except ImportError:
        raise RuntimeError("rendering figures needs matplotlib; install the 'plots' extra") from None
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_figures(sweeps: dict, out_dir) -> list[Path]:
    """Writes one PNG per sweep from :func:`qwdist.reproduce.sweeps`.

    Returns:
        Paths of the written files.

    Raises:
        RuntimeError: If matplotlib is not installed.
    """
    plt = _pyplot()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def save(fig, name):
        path = out / f"{name}.png"
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    if "controlled_phase_distance" in sweeps:
        s = sweeps["controlled_phase_distance"]
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(s["theta"], s["distance"], marker="o", ms=3)
        ax.set_xlabel("theta")
        ax.set_ylabel("D(I, CP(theta))")
        ax.grid(alpha=0.3)
        save(fig, "controlled_phase_distance")

    if "cnot_unitary_error_rate" in sweeps:
        s = sweeps["cnot_unitary_error_rate"]
        fig, (ax, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
        ax.plot(s["theta"], s["error_rate"], label="error rate")
        ax.plot(s["theta"], s["experiment_cost_lb"], "--", label="experiment cost bound")
        ax.set_xlabel("theta")
        ax.legend(fontsize=8)
        ax.grid(alpha=0.3)
        ax2.plot(s["theta"], s["circuit_cost_lb"], color="C2")
        ax2.set_xlabel("theta")
        ax2.set_ylabel("circuit cost bound")
        ax2.grid(alpha=0.3)
        save(fig, "cnot_unitary_error_rate")

    if "cnot_depolarizing_bracket" in sweeps:
        s = sweeps["cnot_depolarizing_bracket"]
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.fill_between(s["p"], s["lower"], s["upper"], alpha=0.3, label="certified bracket")
        if "estimate" in s:
            ax.plot(s["p"], s["estimate"], marker="o", ms=3, label="ascent estimate")
        ax.set_xlabel("p")
        ax.set_ylabel("error rate")
        ax.legend(fontsize=8)
        ax.grid(alpha=0.3)
        save(fig, "cnot_depolarizing_bracket")
    return written
