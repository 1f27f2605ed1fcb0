"""Command-line front end: encode/decode barcodes, run channels and attacks, simulate protocols."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .arrangement import (OK, ArrangementLayout, AttackKind, AttackSpec, apply_attack, assign_cues, attack_order,
                          verify_arrangement)
from .barcode import (BarcodeImage, BarcodeSpec, as_labels, capacity, control_points, decode_barcode, encode_barcode,
                      interior_matrix, observe_cue)
from .channel import ChannelModel, measure_superpixel_error, transmit
from .ecc import EccPolicy
from .errors import AuthError, CuebarError, RejectError
from .glyphs import read_cue
from .keys import keygen, load_key, save_key
from .ppm import read_ppm, write_png, write_ppm
from .protocol import Method, builtin_strategies, evaluate_security
from .registration import AffineTransform, landmark_trial, register

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers

def _rng(args) -> np.random.Generator:
    return np.random.default_rng(args.seed)


def _spec(args) -> BarcodeSpec:
    return BarcodeSpec.parse(args.spec) if args.spec else BarcodeSpec()


def _policy(args) -> EccPolicy:
    if not args.policy:
        return EccPolicy()
    key, _, val = args.policy.partition("=")
    if key.strip() != "t_reject" or not val.strip().isdigit():
        raise UsageError("--policy expects t_reject=N")
    return EccPolicy(int(val))


def _emit(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=False)
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


def _split_message(m: bytes, n: int) -> list[bytes]:
    size = -(-len(m) // n) if m else 0
    return [m[i * size:(i + 1) * size] for i in range(n)]


def _load_manifest(path: str) -> tuple[dict, Path]:
    p = Path(path)
    return json.loads(p.read_text()), p.parent


def _spec_from_manifest(man: dict) -> BarcodeSpec:
    return BarcodeSpec(**man["spec"])


def _write_block(out_dir: Path, name: str, rgb: np.ndarray, meta: dict, png: bool) -> dict:
    write_ppm(out_dir / f"{name}.ppm", rgb)
    if png:
        write_png(out_dir / f"{name}.png", rgb)
    entry = dict(meta, file=f"{name}.ppm")
    (out_dir / f"{name}.json").write_text(json.dumps(entry, indent=2) + "\n")
    return entry


def _write_manifest(out_dir: Path, man: dict) -> Path:
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(man, indent=2) + "\n")
    return path


def _registered(raster: np.ndarray, spec: BarcodeSpec) -> np.ndarray:
    """Use the raster as is when it has the nominal size, otherwise register it first."""
    if raster.shape[:2] == spec.display_shape:
        return as_labels(raster)
    rect, _ = register(raster, spec)
    return as_labels(rect)


# ---------------------------------------------------------------------------
# subcommands

def cmd_keygen(args) -> int:
    key = keygen(args.seed if args.seed is not None else 0)
    if args.out:
        save_key(key, args.out)
    else:
        sys.stdout.write(key.to_text())
    return EXIT_OK


def cmd_encode(args) -> int:
    if not args.key:
        raise UsageError("encode needs --key")
    key = load_key(args.key)
    spec = _spec(args)
    layout = ArrangementLayout.parse(args.layout or "single")
    if args.text is not None:
        m = args.text.encode()
    elif args.message:
        m = Path(args.message).read_bytes()
    else:
        raise UsageError("encode needs --message FILE or --text STRING")
    rng = _rng(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    blocks = []
    for i, (part, cue) in enumerate(zip(_split_message(m, layout.n_blocks), assign_cues(layout))):
        img = encode_barcode(key, part, cue, spec, rng.bytes(16))
        meta = {"index": i, "cue": list(cue), "layout": layout.to_json(), "spec": spec.as_dict()}
        blocks.append(_write_block(out, f"block_{i:03d}", img.rgb(), meta, args.png))
    man = {"layout": layout.to_json(), "spec": spec.as_dict(), "key_file": str(Path(args.key).resolve()),
           "seed": args.seed, "blocks": [{k: b[k] for k in ("index", "file", "cue")} for b in blocks]}
    _emit({"manifest": str(_write_manifest(out, man)), "blocks": len(blocks)}, args.report)
    return EXIT_OK


def _decode_images(files: list[Path], key, spec: BarcodeSpec, policy: EccPolicy):
    parts, report, cues, failed = [], [], [], False
    for f in files:
        raster = _registered(read_ppm(f), spec)
        entry = {"file": str(f)}
        cue = read_cue(observe_cue(raster, spec))
        entry["cue"] = cue
        cues.append(tuple(cue))
        try:
            msg, _ = decode_barcode(raster, key, policy, spec)
            entry.update(status="OK", bytes=len(msg))
            parts.append(msg)
        except (RejectError, AuthError) as exc:
            failed = True
            entry.update(status="REJECTED", error=type(exc).__name__, detail=str(exc))
        report.append(entry)
    return parts, report, cues, failed


def cmd_decode(args) -> int:
    if not args.key:
        raise UsageError("decode needs --key")
    key = load_key(args.key)
    policy = _policy(args)
    if args.manifest:
        man, base = _load_manifest(args.manifest)
        spec = _spec_from_manifest(man)
        layout = ArrangementLayout.from_json(man["layout"])
        files = [base / b["file"] for b in man["blocks"]]
    elif args.images:
        spec = _spec(args)
        layout = ArrangementLayout.parse(args.layout) if args.layout else None
        files = [Path(f) for f in args.images]
    else:
        raise UsageError("decode needs --manifest or image files")
    parts, blocks, cues, failed = _decode_images(files, key, spec, policy)
    result = {"seed": args.seed, "blocks": blocks, "status": "REJECTED" if failed else "OK"}
    if layout is not None:
        verdict = verify_arrangement(cues, layout)
        result["arrangement"] = verdict.to_json()
        failed |= verdict is not OK
    if failed:
        result["status"] = "REJECTED"
    elif args.out:
        Path(args.out).write_bytes(b"".join(parts))
    _emit(result, args.report)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_verify(args) -> int:
    man, base = _load_manifest(args.manifest)
    layout = ArrangementLayout.parse(args.layout) if args.layout else ArrangementLayout.from_json(man["layout"])
    if args.observed:
        observed = [tuple(c) for c in json.loads(Path(args.observed).read_text())]
    else:
        spec = _spec_from_manifest(man)
        observed = [tuple(read_cue(observe_cue(_registered(read_ppm(base / b["file"]), spec), spec)))
                    for b in man["blocks"]]
    verdict = verify_arrangement(observed, layout)
    _emit(dict(verdict.to_json(), observed=[list(c) for c in observed], seed=args.seed), args.report)
    return EXIT_OK if verdict is OK else EXIT_FAIL


def _channel_model(args, seed: int, shape) -> ChannelModel:
    center = ((shape[0] - 1) / 2, (shape[1] - 1) / 2)
    warp = AffineTransform.similarity(args.rot_deg or 0.0, args.scale or 1.0, args.t_row or 0.0,
                                      args.t_col or 0.0, center)
    scale = args.scale or 1.0
    capture = None
    if scale > 1.0 or args.rot_deg or args.t_row or args.t_col:
        grow = max(scale, 1.0) + 0.25
        capture = (int(shape[0] * grow), int(shape[1] * grow))
        off = ((capture[0] - shape[0]) / 2, (capture[1] - shape[1]) / 2)
        warp = AffineTransform(1, 0, 0, 1, *off).compose(warp)
    return ChannelModel(flip_prob=args.flip or 0.0, warp=warp, color_jitter=int(args.jitter or 0), seed=seed,
                        capture_shape=capture)


def cmd_channel(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seeds = np.random.SeedSequence(args.seed or 0)
    if args.manifest:
        man, base = _load_manifest(args.manifest)
        sources = [(base / b["file"], b) for b in man["blocks"]]
    elif args.images:
        man, sources = None, [(Path(f), None) for f in args.images]
    else:
        raise UsageError("channel needs --manifest or image files")
    new_blocks = []
    for (src, meta), child in zip(sources, seeds.spawn(len(sources))):
        raster = read_ppm(src)
        model = _channel_model(args, int(child.generate_state(1)[0]), raster.shape)
        captured = transmit(raster, model)
        name = src.stem
        entry = {"index": meta["index"], "cue": meta["cue"]} if meta else {}
        new_blocks.append(_write_block(out, name, captured, entry, args.png))
    if man is not None:
        man = dict(man, blocks=[{k: b[k] for k in ("index", "file", "cue")} for b in new_blocks],
                   channel={"flip_prob": args.flip or 0.0, "jitter": args.jitter or 0, "rot_deg": args.rot_deg or 0.0,
                            "scale": args.scale or 1.0, "t_row": args.t_row or 0.0, "t_col": args.t_col or 0.0,
                            "seed": args.seed})
        _write_manifest(out, man)
    _emit({"written": len(new_blocks), "out": str(out), "seed": args.seed}, args.report)
    return EXIT_OK


def _int_list(text: str | None) -> tuple[int, ...]:
    return tuple(int(t) for t in text.split(",")) if text else ()


def cmd_attack(args) -> int:
    man, base = _load_manifest(args.manifest)
    spec = _spec_from_manifest(man)
    layout = ArrangementLayout.from_json(man["layout"])
    kind = AttackKind(args.type.upper())
    blocks = [BarcodeImage(as_labels(read_ppm(base / b["file"])), spec, control_points(spec)) for b in man["blocks"]]
    replacement = None
    if kind is AttackKind.SUBSTITUTE:
        if not args.replacement:
            raise UsageError("SUBSTITUTE needs --replacement IMAGE")
        replacement = BarcodeImage(as_labels(read_ppm(args.replacement)), spec, control_points(spec))
    lblocks = _int_list(args.lblocks)
    if kind is AttackKind.CUE_FLIP and not lblocks:
        rng = _rng(args)
        lblocks = tuple(sorted(rng.choice(spec.n_pairs, size=args.beta, replace=False).tolist()))
    offset = _int_list(args.offset) or (0, 0)
    attack = AttackSpec(kind, perm=_int_list(args.perm), row=args.row, block=args.block, lblocks=lblocks,
                        offset=offset, replacement=replacement)
    order_meta = list(man["blocks"])
    order = attack_order(len(blocks), attack, layout)
    attacked = apply_attack(blocks, attack, layout)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    new_blocks = []
    for pos, (img, orig) in enumerate(zip(attacked, order)):
        meta = {"index": order_meta[orig]["index"], "cue": order_meta[orig]["cue"], "position": pos}
        new_blocks.append(_write_block(out, f"block_{pos:03d}", img.rgb(), meta, args.png))
    new_man = dict(man, blocks=[{k: b[k] for k in ("index", "file", "cue")} for b in new_blocks],
                   attack=attack.to_json(), seed=args.seed)
    _write_manifest(out, new_man)
    _emit({"attack": attack.to_json(), "blocks": len(new_blocks), "out": str(out), "seed": args.seed}, args.report)
    return EXIT_OK


def cmd_simulate(args) -> int:
    pool = builtin_strategies()
    names = [s.strip() for s in args.strategies.split(",")] if args.strategies else None
    if names:
        unknown = [n for n in names if n not in pool]
        if unknown:
            raise UsageError(f"unknown strategies {unknown}; choose from {sorted(pool)}")
        strategies = [pool[n] for n in names]
    else:
        strategies = None
    report = evaluate_security(Method(args.method.upper()), args.model, strategies, args.trials,
                               args.seed or 0, workers=args.workers)
    _emit(report.to_json(), args.report)
    return EXIT_OK


def cmd_capacity(args) -> int:
    print(capacity(args.pixels))
    return EXIT_OK


def cmd_stats(args) -> int:
    spec = _spec(args)
    rng = _rng(args)
    key = keygen(int(rng.integers(0, 2**63)))
    img = encode_barcode(key, rng.bytes(spec.max_message_bytes), ["1"], spec, rng.bytes(16))
    if args.kind == "displacement":
        dists = np.concatenate([landmark_trial(img.rgb(), spec, rng) for _ in range(args.trials)])
        hist, edges = np.histogram(dists, bins=10, range=(0.0, max(2.0, float(dists.max()))))
        out = {"kind": "displacement", "seed": args.seed, "trials": args.trials,
               "distances": [round(float(d), 4) for d in dists], "mean": float(dists.mean()),
               "histogram": {"counts": hist.tolist(), "edges": edges.tolist()}}
    else:
        orig = interior_matrix(img, spec)
        seeds = np.random.SeedSequence(args.seed or 0).spawn(args.trials)
        rates = [measure_superpixel_error(orig, transmit(img, ChannelModel(flip_prob=args.flip,
                                                                           seed=int(s.generate_state(1)[0]))), spec)
                 for s in seeds]
        out = {"kind": "error-rate", "seed": args.seed, "frames": args.trials, "flip_prob": args.flip,
               "rates": rates, "mean": float(np.mean(rates))}
    _emit(out, args.report)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="file of key=value lines; flags override it")
    common.add_argument("--key", help="session key file")
    common.add_argument("--seed", type=int, help="seed for every random choice")
    common.add_argument("--spec", help="barcode size XxY, default 60x42")
    common.add_argument("--layout", help="table:RxC, linear:N or single")
    common.add_argument("--policy", help="t_reject=N")
    common.add_argument("--report", help="write the JSON report here instead of stdout")
    common.add_argument("--png", action="store_true", help="also write PNG copies")

    p = argparse.ArgumentParser(prog="cuebar", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("keygen", parents=[common], help="derive a session key file from --seed")
    s.add_argument("--out")
    s.set_defaults(func=cmd_keygen)

    s = sub.add_parser("encode", parents=[common], help="message + layout -> barcode PPMs and manifest")
    s.add_argument("--message", help="file holding the message bytes")
    s.add_argument("--text", help="message given inline")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_encode)

    s = sub.add_parser("decode", parents=[common], help="barcode images + key -> message and cue report")
    s.add_argument("images", nargs="*")
    s.add_argument("--manifest")
    s.add_argument("--out", help="write the recovered message here")
    s.set_defaults(func=cmd_decode)

    s = sub.add_parser("verify-arrangement", parents=[common], help="check observed cues against a layout")
    s.add_argument("--manifest", required=True)
    s.add_argument("--observed", help="JSON list of cue symbol lists; default: read from the images")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("channel", parents=[common], help="push images through the synthetic camera channel")
    s.add_argument("images", nargs="*")
    s.add_argument("--manifest")
    s.add_argument("--out", required=True)
    s.add_argument("--flip", type=float, help="per-superpixel flip probability")
    s.add_argument("--jitter", type=float, help="max colour jitter per channel")
    s.add_argument("--rot-deg", type=float)
    s.add_argument("--scale", type=float)
    s.add_argument("--t-row", type=float)
    s.add_argument("--t-col", type=float)
    s.set_defaults(func=cmd_channel)

    s = sub.add_parser("attack", parents=[common], help="apply an attack to a manifest's blocks")
    s.add_argument("--manifest", required=True)
    s.add_argument("--type", required=True, choices=[k.value for k in AttackKind] + [k.value.lower() for k in AttackKind])
    s.add_argument("--perm", help="comma-separated 0-based order (REARRANGE)")
    s.add_argument("--row", type=int, default=0)
    s.add_argument("--block", type=int, default=0)
    s.add_argument("--lblocks", help="comma-separated L-block (pair) indices for CUE_FLIP")
    s.add_argument("--beta", type=int, default=14, help="random L-blocks to flip when --lblocks is absent")
    s.add_argument("--offset", help="dr,dc for CONTROL_POINT_TAMPER")
    s.add_argument("--replacement", help="image for SUBSTITUTE")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_attack)

    s = sub.add_parser("simulate", parents=[common], help="run a protocol security evaluation")
    s.add_argument("--method", required=True, choices=[m.value for m in Method] + [m.value.lower() for m in Method])
    s.add_argument("--model", type=int, required=True, choices=(1, 2, 3))
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--strategies", help="comma-separated built-in strategy names")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("capacity", parents=[common], help="idealised payload bits for a pixel area")
    s.add_argument("--pixels", type=int, required=True)
    s.set_defaults(func=cmd_capacity)

    s = sub.add_parser("stats", parents=[common], help="registration displacement or superpixel error reports")
    s.add_argument("kind", choices=("displacement", "error-rate"))
    s.add_argument("--trials", type=int, default=30, help="frames / registration runs")
    s.add_argument("--flip", type=float, default=0.02)
    s.set_defaults(func=cmd_stats)
    return p


_CONFIG_ALIASES = {"flip_prob": "flip", "warp.rot_deg": "rot_deg", "warp.scale": "scale",
                   "warp.t_row": "t_row", "warp.t_col": "t_col", "t_reject": "policy"}


def apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Fill options left unset on the command line from a key=value config file."""
    if not getattr(args, "config", None):
        return
    sub = parser._subparsers._group_actions[0].choices[args.command]  # noqa: SLF001
    types = {a.dest: a.type for a in sub._actions}  # noqa: SLF001
    for n, raw in enumerate(Path(args.config).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{args.config}:{n}: expected key=value")
        k, v = (t.strip() for t in line.split("=", 1))
        dest = _CONFIG_ALIASES.get(k, k).replace("-", "_").replace(".", "_")
        if dest == "policy" and k == "t_reject":
            v = f"t_reject={v}"
        if dest not in types:
            continue  # keys for other subcommands
        if getattr(args, dest, None) in (None, False):
            conv = types[dest] or str
            setattr(args, dest, conv(v))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        apply_config(args, parser)
        return args.func(args)
    except UsageError as exc:
        print(f"cuebar: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CuebarError, ValueError, OSError) as exc:
        print(f"cuebar: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
