from .svg import PALETTE, REFERENCE_COLOR, render_svg, write_svg

__all__ = ["PALETTE", "REFERENCE_COLOR", "render_svg", "write_svg"]
