"""Entry point: load a model and serve one protocol session."""

from __future__ import annotations

import argparse
import sys

from .models import load_model
from .server import ServerConfig, serve


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="shapbridge",
        description="Serve a tabular model over the line-delimited JSON "
                    "prediction protocol",
    )
    parser.add_argument(
        "--model", required=True,
        help="artifact path or inline:<echo0|mean>",
    )
    parser.add_argument(
        "--tcp", type=int, metavar="PORT",
        help="listen on 127.0.0.1:PORT instead of stdio (0 = ephemeral)",
    )
    parser.add_argument("--batch-cap", type=int, default=4096)
    args = parser.parse_args(argv)

    try:
        bundle = load_model(args.model)
    except Exception as exc:
        print(f"cannot load model {args.model!r}: {exc}", file=sys.stderr)
        return 1
    config = ServerConfig(
        model_spec=args.model,
        mode="tcp" if args.tcp is not None else "stdio",
        port=args.tcp or 0,
        batch_cap=args.batch_cap,
    )
    return serve(config, bundle)


if __name__ == "__main__":
    sys.exit(main())
