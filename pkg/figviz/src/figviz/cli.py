"""figviz <spec.json> [more specs...] — render figures from ffma CSVs."""

from __future__ import annotations

import sys

from .render import FigureSpec, RenderError, render


def main(argv=None) -> int:
    args = sys.argv[1:] if argv is None else list(argv)
    if not args or args[0] in ("-h", "--help"):
        print(__doc__.strip())
        return 0 if args else 2
    try:
        for path in args:
            spec = FigureSpec.from_json(path)
            render(spec)
            print(f"figviz: wrote {spec.out}")
    except (RenderError, FileNotFoundError) as e:
        print(f"figviz: error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
