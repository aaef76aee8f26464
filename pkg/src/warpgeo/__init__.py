"""Hypersurface geometry in warped products I x_omega Q_eps^n."""

__version__ = "0.1.0"
