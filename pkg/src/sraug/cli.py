"""Command-line front end.

`sraug augment` runs the batch pipeline; the small subcommands expose
individual stages (mel extraction, resizing, reconstruction, pitch
tracking, pitch correlation, KL arithmetic) for scripting and debugging.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .audio_io import read_wav, resample, write_wav
from .errors import SraugError
from .pipeline import MANIFEST_NAME, PipelineConfig, run
from .pitch_eval import PitchConfig, f0_pcc, write_f0_csv, yin_f0
from .spectral import SpectralConfig, mel_spectrogram, read_melf, write_melf
from .sr_ops import HORIZONTAL, VERTICAL, RatioRange, ResizeSpec, horizontal_sr, vertical_sr
from .vc_losses import DiagGaussian, kl_diag_gaussian
from .vocoder import GriffinLimConfig, reconstruct_from_mel

# augment settings: key -> (config-file parser, built-in default)
_AUGMENT_KEYS = {
    "in": (str, None),
    "out": (str, None),
    "ratio_min": (float, 0.85),
    "ratio_max": (float, 1.15),
    "variants": (int, 1),
    "axis": (str, VERTICAL),
    "seed": (int, 0),
    "noise_std": (float, 0.1),
    "gl_iters": (int, 60),
    "vocoder_cmd": (str, None),
    "jobs": (int, 1),
}


def _read_config_file(path) -> dict:
    """Parse a key=value settings file (one pair per line, # comments)."""
    settings = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _AUGMENT_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown setting '{key}'")
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        settings[key] = _AUGMENT_KEYS[key][0](value)
    return settings


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sraug",
        description="Spectrogram-resize augmentation and pitch evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    aug = sub.add_parser("augment", help="augment a corpus of WAV files")
    aug.add_argument("--in", dest="in_", metavar="PATH", help="input file or directory")
    aug.add_argument("--out", metavar="DIR", help="output directory")
    aug.add_argument("--ratio-min", type=float, help="low end of the ratio range")
    aug.add_argument("--ratio-max", type=float, help="high end of the ratio range")
    aug.add_argument("--variants", type=int, help="augmented copies per file")
    aug.add_argument("--axis", choices=(VERTICAL, HORIZONTAL), help="resize axis")
    aug.add_argument("--seed", type=int, help="master seed")
    aug.add_argument("--noise-std", type=float, help="padding noise scale (log-mel)")
    aug.add_argument("--gl-iters", type=int, help="Griffin-Lim iterations")
    aug.add_argument("--vocoder-cmd", help="external vocoder template with {mel} {wav}")
    aug.add_argument("--jobs", type=int, help="parallel worker processes")
    aug.add_argument("--config", help="key=value settings file; flags override it")

    mel = sub.add_parser("mel", help="extract a log-mel file from a WAV")
    mel.add_argument("wav")
    mel.add_argument("melf")

    rsz = sub.add_parser("resize", help="resize a log-mel file")
    rsz.add_argument("melf_in")
    rsz.add_argument("melf_out")
    rsz.add_argument("--ratio", type=float, required=True)
    rsz.add_argument("--seed", type=int, default=0)
    rsz.add_argument("--axis", choices=(VERTICAL, HORIZONTAL), default=VERTICAL)
    rsz.add_argument("--noise-std", type=float, default=0.1)

    rec = sub.add_parser("reconstruct", help="waveform from a log-mel file")
    rec.add_argument("melf")
    rec.add_argument("wav")
    rec.add_argument("--gl-iters", type=int, default=60)

    f0 = sub.add_parser("f0", help="YIN pitch track to CSV")
    f0.add_argument("wav")
    f0.add_argument("csv")

    pcc = sub.add_parser("f0pcc", help="F0 correlation between two WAVs")
    pcc.add_argument("wav_a")
    pcc.add_argument("wav_b")

    kl = sub.add_parser("kl", help="KL divergence of two diagonal Gaussians")
    kl.add_argument("q_json", help='JSON file with "mean" and "log_std" lists')
    kl.add_argument("p_json", help='JSON file with "mean" and "log_std" lists')

    return parser


def _cmd_augment(args) -> int:
    settings = {key: default for key, (_, default) in _AUGMENT_KEYS.items()}
    if args.config:
        settings.update(_read_config_file(args.config))
    flags = {
        "in": args.in_,
        "out": args.out,
        "ratio_min": args.ratio_min,
        "ratio_max": args.ratio_max,
        "variants": args.variants,
        "axis": args.axis,
        "seed": args.seed,
        "noise_std": args.noise_std,
        "gl_iters": args.gl_iters,
        "vocoder_cmd": args.vocoder_cmd,
        "jobs": args.jobs,
    }
    settings.update({k: v for k, v in flags.items() if v is not None})
    if not settings["in"] or not settings["out"]:
        print("augment needs --in and --out (flags or config file)", file=sys.stderr)
        return 2

    cfg = PipelineConfig(
        input=settings["in"],
        output_dir=settings["out"],
        ratio_range=RatioRange(settings["ratio_min"], settings["ratio_max"]),
        variants_per_file=settings["variants"],
        axis=settings["axis"],
        master_seed=settings["seed"],
        gl=GriffinLimConfig(n_iters=settings["gl_iters"]),
        vocoder_cmd=settings["vocoder_cmd"],
        pad_noise_std=settings["noise_std"],
    )
    manifest = run(cfg, jobs=settings["jobs"])
    print(
        f"wrote {len(manifest.records)} files, {len(manifest.failures)} failures, "
        f"manifest at {Path(settings['out']) / MANIFEST_NAME}"
    )
    for failure in manifest.failures:
        print(
            f"FAILED {failure['source_path']} at stage {failure['stage']}: "
            f"{failure['error']}",
            file=sys.stderr,
        )
    return 1 if manifest.failures else 0


def _cmd_mel(args) -> int:
    cfg = SpectralConfig()
    wave = read_wav(args.wav)
    if wave.sample_rate != cfg.sample_rate:
        wave = resample(wave, cfg.sample_rate)
    write_melf(args.melf, mel_spectrogram(wave, cfg))
    return 0


def _cmd_resize(args) -> int:
    mel = read_melf(args.melf_in)
    spec = ResizeSpec(
        ratio=args.ratio, axis=args.axis, pad_noise_std=args.noise_std, seed=args.seed
    )
    if args.axis == VERTICAL:
        out = vertical_sr(mel, spec)
    else:
        out = horizontal_sr(mel, spec)
    write_melf(args.melf_out, out)
    return 0


def _cmd_reconstruct(args) -> int:
    mel = read_melf(args.melf)
    wave = reconstruct_from_mel(mel, GriffinLimConfig(n_iters=args.gl_iters))
    write_wav(args.wav, wave)
    return 0


def _cmd_f0(args) -> int:
    write_f0_csv(args.csv, yin_f0(read_wav(args.wav), PitchConfig()))
    return 0


def _cmd_f0pcc(args) -> int:
    value = f0_pcc(read_wav(args.wav_a), read_wav(args.wav_b), PitchConfig())
    print(f"{value:.6f}")
    return 0


def _load_gaussian(path) -> DiagGaussian:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return DiagGaussian(data["mean"], data["log_std"])


def _cmd_kl(args) -> int:
    print(f"{kl_diag_gaussian(_load_gaussian(args.q_json), _load_gaussian(args.p_json)):.6f}")
    return 0


_COMMANDS = {
    "augment": _cmd_augment,
    "mel": _cmd_mel,
    "resize": _cmd_resize,
    "reconstruct": _cmd_reconstruct,
    "f0": _cmd_f0,
    "f0pcc": _cmd_f0pcc,
    "kl": _cmd_kl,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (SraugError, ValueError, OSError) as exc:
        print(f"sraug {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
