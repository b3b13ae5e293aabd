"""figures: render one recipe from an artifact directory."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .recipes import RECIPES, FigureRecipe, render
from .schema import SchemaError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render publication-style figures from simulator "
                    "artifact files.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("recipe", choices=sorted(RECIPES))
    parser.add_argument("--in", dest="in_dir", default=".", metavar="DIR",
                        help="artifact directory (default: .)")
    parser.add_argument("--out", default=None, metavar="FILE",
                        help="output image (default: <recipe>.png)")
    parser.add_argument("--input", default=None, metavar="NAME",
                        help="artifact filename inside DIR, when it "
                             "differs from the recipe's convention")
    parser.add_argument("--title", default=None)
    parser.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)

    out = Path(args.out) if args.out else Path(f"{args.recipe}.png")
    style = {"dpi": args.dpi}
    if args.title:
        style["title"] = args.title
    recipe = FigureRecipe(figure_id=args.recipe, in_dir=Path(args.in_dir),
                          out_file=out, input_name=args.input, style=style)
    try:
        render(recipe)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0
