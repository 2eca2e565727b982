"""pathmetrics-extract: run models over a manifest, emit pathmetrics files."""

import argparse
import sys
from pathlib import Path

from .extract import DEFAULT_MODELS, ExtractionJob, extract_features, extract_posteriors
from .g2p import build_lexicon


def build_parser():
    p = argparse.ArgumentParser(
        prog="pathmetrics-extract",
        description="Export wav2vec2 posteriors/features and a G2P lexicon "
                    "in the pathmetrics file formats.",
    )
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", default=None,
                   help="output directory (default: manifest's directory)")
    p.add_argument("--models", default="default",
                   help="'default' or SEMANTIC,PHONETIC[,FEATURES] model ids/paths")
    p.add_argument("--language", default="en", choices=["en", "nl", "it", "es"])
    p.add_argument("--device", default="cpu", choices=["cpu", "gpu"])
    p.add_argument("--feature-layer", type=int, default=10)
    p.add_argument("--g2p", default="espeak",
                   help="'espeak' or 'table:<json path>'")
    p.add_argument("--phone-map", default=None,
                   help="editable IPA -> model-vocab mapping table (JSON)")
    p.add_argument("--steps", default="posteriors,features,lexicon",
                   help="comma subset of posteriors,features,lexicon")
    return p


def resolve_models(spec, language):
    if spec == "default":
        return (DEFAULT_MODELS["semantic"][language], DEFAULT_MODELS["phonetic"],
                DEFAULT_MODELS["features"])
    parts = spec.split(",")
    if len(parts) == 2:
        return parts[0], parts[1], None
    if len(parts) == 3:
        return parts[0], parts[1], parts[2]
    raise ValueError("--models expects 'default' or 2-3 comma-separated ids")


def main(argv=None):
    args = build_parser().parse_args(argv)
    manifest = Path(args.manifest)
    out_dir = Path(args.out) if args.out else manifest.parent
    try:
        semantic, phonetic, features = resolve_models(args.models, args.language)
    except ValueError as e:
        print(f"config error: {e}")
        return 3
    device = "cuda" if args.device == "gpu" else "cpu"
    job = ExtractionJob(
        manifest_path=manifest, out_dir=out_dir,
        semantic_model=semantic, phonetic_model=phonetic, feature_model=features,
        feature_layer=args.feature_layer, device=device,
    )
    steps = [s for s in args.steps.split(",") if s]
    try:
        doc = None
        if "posteriors" in steps:
            doc = extract_posteriors(job)
        if "features" in steps:
            doc = extract_features(job, doc)
        if "lexicon" in steps:
            build_lexicon(out_dir / "manifest.json" if doc is not None else manifest,
                          out_dir, language=args.language, g2p=args.g2p,
                          phone_map_path=args.phone_map)
    except (RuntimeError, ValueError, OSError) as e:
        print(f"error: {e}")
        return 1
    if job.skipped:
        print(f"skipped utterances: {', '.join(job.skipped)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
