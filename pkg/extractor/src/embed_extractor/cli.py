import argparse
import json
import sys

from .extract import ExtractorConfig, extract


def main(argv=None):
    p = argparse.ArgumentParser(prog="extract",
                                description="Dump frozen-transformer token states to a TEC1 cache")
    p.add_argument("--model", default="roberta-base")
    p.add_argument("--input", required=True, help="JSON-lines corpus")
    p.add_argument("--output", required=True, help="TEC1 cache path")
    p.add_argument("--max-tokens", type=int, default=512)
    p.add_argument("--device", default="cpu")
    p.add_argument("--batch-size", type=int, default=8)
    args = p.parse_args(argv)
    cfg = ExtractorConfig(model=args.model, max_tokens=args.max_tokens,
                          input_path=args.input, output_path=args.output,
                          device=args.device, batch_size=args.batch_size)
    try:
        sidecar = extract(cfg)
    except Exception as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    with open(args.output + ".json", "w") as f:
        json.dump(sidecar, f)
    print(json.dumps(sidecar))
    return 0


if __name__ == "__main__":
    sys.exit(main())
