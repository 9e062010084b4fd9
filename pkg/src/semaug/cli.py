"""Command-line driver: tag, fbank, cmvn, align, augment, combine, inspect, synth.

Exit codes: 0 success, 1 partial (some utterances skipped or failed but
outputs were written), 2 fatal.
"""
from __future__ import annotations

import argparse
import sys
import zlib
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .alignment import (AlignmentError, format_alignment, group_to_tokens, parse_alignment_line,
                        parse_ctm, permute_alignment, to_frame_spans)
from .archive import ArchiveError, ArchiveWriter, read_archive, read_index, read_ref
from .config import PATH_KEYS, ConfigError, PipelineConfig, build_config, format_config
from .dataset import (InsufficientSource, Manifest, UtteranceRecord, augment_corpus, base_id,
                      combine)
from .features import (CmvnStats, FeatureError, accumulate_cmvn, apply_cmvn, compute_fbank,
                       read_wav)
from .lexicon import (EmptyTranscript, LexiconError, MalformedToken, TaggedSentence,
                      format_tagged, load_lexicon, load_tagset, parse_tagged, tag_text)
from .syntax import parse_variant_line
from .visual import boundary_lines, ppm_bytes

OK, PARTIAL, FATAL = 0, 1, 2


class CommandError(Exception):
    pass


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _read_lines(path) -> list[str]:
    with open(path, encoding="utf-8") as f:
        return [line.rstrip("\r\n") for line in f]


def _write_lines(path, lines) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for line in lines:
            f.write(line + "\n")


def _pmap(fn, items, workers: int):
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(pool.map(fn, items))


def _read_tagged(path) -> dict[str, TaggedSentence]:
    out = {}
    for line in _read_lines(path):
        if line.strip():
            s = parse_tagged(line)
            out[s.utt_id] = s
    return out


def _read_alignments(path) -> dict:
    out = {}
    for line in _read_lines(path):
        if line.strip():
            a = parse_alignment_line(line)
            out[a.utt_id] = a
    return out


def cmd_tag(cfg: PipelineConfig, args) -> int:
    out_path = cfg.out("tagged.txt")
    errors = 0
    lines = []
    if args.external:
        tagset = None
        if cfg.tagset:
            with open(cfg.tagset, encoding="utf-8") as f:
                tagset = load_tagset(f)
        source = [l for l in _read_lines(args.external) if l.strip()]
        if not source:
            raise CommandError("EmptyInput: no tagged lines")
        for lineno, line in enumerate(source, 1):
            try:
                lines.append(format_tagged(parse_tagged(line, tagset)))
            except (MalformedToken, EmptyTranscript) as exc:
                _err(f"line {lineno}: {exc}")
                errors += 1
    else:
        with open(cfg.path("lexicon"), encoding="utf-8") as f:
            lexicon = load_lexicon(f)
        source = [l for l in _read_lines(cfg.path("transcripts")) if l.strip()]
        if not source:
            raise CommandError("EmptyInput: transcript file has no utterances")
        for lineno, line in enumerate(source, 1):
            utt_id, sep, text = line.partition("\t")
            if not sep:
                utt_id, _, text = line.partition(" ")
            try:
                lines.append(format_tagged(tag_text(text, lexicon, utt_id.strip())))
            except EmptyTranscript:
                _err(f"line {lineno}: empty transcript for {utt_id!r}")
                errors += 1
    _write_lines(out_path, lines)
    print(f"tagged {len(lines)} utterances -> {out_path}" + (f" ({errors} errors)" if errors else ""))
    return PARTIAL if errors else OK


def cmd_fbank(cfg: PipelineConfig, args) -> int:
    fb = cfg.fbank()
    entries = []
    for line in _read_lines(cfg.path("wav_scp")):
        if line.strip():
            parts = line.split(None, 1)
            if len(parts) != 2:
                raise CommandError(f"bad wav.scp line {line!r}")
            entries.append((parts[0], parts[1].strip()))
    if not entries:
        raise CommandError("EmptyInput: wav list is empty")

    def work(item):
        utt_id, path = item
        try:
            rate, samples = read_wav(path)
            if rate != fb.sample_rate_hz:
                raise FeatureError(f"sample rate {rate} != configured {fb.sample_rate_hz}")
            rng = np.random.default_rng([cfg.seed, zlib.crc32(utt_id.encode("utf-8"))])
            return compute_fbank(samples, fb, rng), None
        except (OSError, FeatureError) as exc:
            return None, f"{type(exc).__name__}: {exc}"

    failed = 0
    with ArchiveWriter(cfg.out("feats.ark"), cfg.out("feats.scp")) as writer:
        for (utt_id, _), (feats, error) in zip(entries, _pmap(work, entries, cfg.workers)):
            if error:
                _err(f"{utt_id}: {error}")
                failed += 1
            else:
                writer.write(utt_id, feats)
    print(f"fbank: {len(entries) - failed} utterances, {failed} failed -> {cfg.out('feats.scp')}")
    if failed == len(entries):
        return FATAL
    return PARTIAL if failed else OK


def cmd_cmvn(cfg: PipelineConfig, args) -> int:
    feats = cfg.path("feats", "feats.scp")
    stats = accumulate_cmvn(m for _, m in read_archive(feats))
    with ArchiveWriter(cfg.out("cmvn.ark"), cfg.out("cmvn.scp")) as writer:
        writer.write("global", stats.to_matrix())
    print(f"cmvn: {stats.count} frames, {stats.dim} dims -> {cfg.out('cmvn.ark')}")
    if args.apply:
        with ArchiveWriter(cfg.out("feats_cmvn.ark"), cfg.out("feats_cmvn.scp")) as writer:
            for utt_id, m in read_archive(feats):
                writer.write(utt_id, apply_cmvn(m, stats))
        print(f"normalized features -> {cfg.out('feats_cmvn.scp')}")
    return OK


def cmd_align(cfg: PipelineConfig, args) -> int:
    with open(cfg.path("ctm"), encoding="utf-8") as f:
        ctm = parse_ctm(f)
    sentences = _read_tagged(cfg.path("tagged", "tagged.txt"))
    feats = dict(read_index(cfg.path("feats", "feats.scp")))
    lines, skips = [], []
    for utt_id, sentence in sentences.items():
        if utt_id not in ctm:
            skips.append((utt_id, "no-ctm"))
            continue
        if utt_id not in feats:
            skips.append((utt_id, "no-features"))
            continue
        try:
            total = read_ref(feats[utt_id]).shape[0]
            groups = group_to_tokens(ctm[utt_id], sentence)
            ali = to_frame_spans(groups, total, cfg.frame_shift_ms, cfg.frame_len_ms, utt_id)
        except (AlignmentError, ArchiveError) as exc:
            skips.append((utt_id, f"{type(exc).__name__}: {exc}"))
            continue
        lines.append(format_alignment(ali))
    _write_lines(cfg.out("align.txt"), lines)
    _write_lines(cfg.out("align_skips.txt"), (f"{u}\t{r}" for u, r in skips))
    print(f"align: {len(lines)} aligned, {len(skips)} skipped -> {cfg.out('align.txt')}")
    if not lines:
        return FATAL
    return PARTIAL if skips else OK


def cmd_augment(cfg: PipelineConfig, args) -> int:
    sentences = _read_tagged(cfg.path("tagged", "tagged.txt"))
    alignments = _read_alignments(cfg.path("align", "align.txt"))
    feats = read_index(cfg.path("feats", "feats.scp"))

    feat_keys = {u for u, _ in feats}
    for name, keys in (("tagged text", set(sentences)), ("alignments", set(alignments)),
                       ("features", feat_keys)):
        others = (set(sentences) | set(alignments) | feat_keys) - keys
        for utt_id in sorted(others):
            _err(f"KeyMismatch: {utt_id} missing from {name}")
    usable = [(u, ref) for u, ref in feats if u in sentences]
    if not usable:
        raise CommandError("KeyMismatch: no utterance has both tagged text and features")

    raw = Manifest(UtteranceRecord(u, sentences[u].text, ref, read_ref(ref).shape[0])
                   for u, ref in usable)
    raw.write(cfg.out("manifest_raw.txt"))
    with ArchiveWriter(cfg.out("aug.ark"), cfg.out("aug.scp")) as writer:
        result = augment_corpus(raw, sentences, alignments, cfg.rules, writer,
                                r7_final=cfg.r7_final, workers=cfg.workers)
    Manifest(result.records).write(cfg.out("manifest_aug.txt"))
    _write_lines(cfg.out("variants.txt"), result.variant_log)
    _write_lines(cfg.out("skips.txt"), (f"{u}\t{r}" for u, r in result.skips))

    print(f"utterances in: {len(raw)}")
    counts = result.counts_by_rule()
    for rule in cfg.rules:
        print(f"variants {rule.value}: {counts.get(rule.value, 0)}")
    print(f"variants total: {len(result.records)}")
    for reason, n in sorted(result.skip_reasons().items()):
        print(f"skipped {reason}: {n}")
    return PARTIAL if result.skips else OK


def cmd_combine(cfg: PipelineConfig, args) -> int:
    raw = Manifest.read(cfg.path("raw_manifest", "manifest_raw.txt"))
    aug_path = cfg.path("aug_manifest", "manifest_aug.txt")
    aug = Manifest.read(aug_path) if aug_path.exists() else Manifest()
    spec = cfg.combination(default_size=len(raw))
    manifest = combine(raw, aug, spec)
    manifest.write(cfg.out("manifest.txt"))
    stats = None
    for record in manifest:
        m = read_ref(record.feature_ref)
        stats = CmvnStats.zeros(m.shape[1]) if stats is None else stats
        stats.add(m)
    with ArchiveWriter(cfg.out("cmvn_combined.ark"), cfg.out("cmvn_combined.scp")) as writer:
        writer.write("global", stats.to_matrix())
    by_tag = manifest.by_tag()
    summary = ", ".join(f"{t.value}={len(by_tag.get(t, []))}" for t, _ in spec.ratios)
    print(f"combined {len(manifest)} utterances ({summary}) -> {cfg.out('manifest.txt')}")
    return OK


def cmd_inspect(cfg: PipelineConfig, args) -> int:
    utt_id = args.utt_id
    records = {}
    for key, name in (("raw_manifest", "manifest_raw.txt"), ("aug_manifest", "manifest_aug.txt")):
        path = cfg.path(key, name)
        if path.exists():
            records.update((r.utt_id, r) for r in Manifest.read(path))
    if utt_id not in records:
        raise CommandError(f"UnknownUtterance: {utt_id}")
    base = base_id(utt_id)
    alignments = _read_alignments(cfg.path("align", "align.txt"))
    variants_path = cfg.path("variants", "variants.txt")
    variants = []
    if variants_path.exists():
        variants = [parse_variant_line(l) for l in _read_lines(variants_path) if l.strip()]

    out_dir = cfg.out("inspect")
    out_dir.mkdir(parents=True, exist_ok=True)
    feats = read_ref(records[utt_id].feature_ref)
    image = out_dir / f"{utt_id}.ppm"
    image.write_bytes(ppm_bytes(feats))

    sidecar = []
    if base in alignments and base in records:
        ali = alignments[base]
        tokens = _read_tagged(cfg.path("tagged", "tagged.txt"))[base].surfaces
        sidecar.append(f"# {base}")
        sidecar.extend(boundary_lines(tokens, ali))
        for v_utt, rule, _, _, perm in variants:
            if v_utt != base:
                continue
            sidecar.append(f"# {base}#{rule.value}")
            sidecar.extend(boundary_lines(perm.apply(tokens), permute_alignment(ali, perm.mapping)))
    else:
        _err(f"no alignment for {base}; boundary file is empty")
    boundaries = out_dir / f"{utt_id}.boundaries.txt"
    _write_lines(boundaries, sidecar)
    print(f"inspect: {feats.shape[0]}x{feats.shape[1]} image -> {image}, boundaries -> {boundaries}")
    return OK


def cmd_synth(cfg: PipelineConfig, args) -> int:
    from .synth import make_corpus

    out = Path(cfg.out_dir).resolve()
    paths = make_corpus(out, args.num_utts, cfg.seed, cfg.sample_rate,
                        per_char_ctm=not args.word_ctm)
    conf = {key: str(paths[key]) for key in ("lexicon", "transcripts", "wav_scp", "ctm")}
    conf["out_dir"] = str(out)
    conf["sample_rate"] = cfg.sample_rate
    (out / "semaug.conf").write_text(format_config(conf), encoding="utf-8")
    print(f"synthetic corpus of {args.num_utts} utterances -> {out} (config: {out / 'semaug.conf'})")
    return OK


COMMANDS = {
    "tag": (cmd_tag, (), "segment and POS-tag transcripts"),
    "fbank": (cmd_fbank, ("wav_scp",), "extract log-Mel filterbank features"),
    "cmvn": (cmd_cmvn, (), "compute global CMVN statistics"),
    "align": (cmd_align, ("ctm",), "convert CTM alignments to frame spans"),
    "augment": (cmd_augment, (), "transpose transcripts and splice features"),
    "combine": (cmd_combine, (), "mix raw and augmented data by ratio"),
    "inspect": (cmd_inspect, (), "write a spectrogram image and word boundaries"),
    "synth": (cmd_synth, (), "generate a synthetic toy corpus"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semaug", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--rules", help="comma list of rules, e.g. R1,R2,R3,R4")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config key")

    common = argparse.ArgumentParser(add_help=False)
    for key in PATH_KEYS:
        common.add_argument("--" + key.replace("_", "-"), dest=key)
    common.add_argument("--ratios", help="e.g. Raw=0.8,R1=0.05,R2=0.05,R3=0.05,R4=0.05")
    common.add_argument("--target-size", type=int, dest="target_size")
    common.add_argument("--r7-final", action="store_const", const=True, dest="r7_final",
                        help="R7 moves the adverbial to the end instead of the front")

    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, _, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "tag":
            p.add_argument("--external", help="ingest externally tagged text instead of segmenting")
        elif name == "cmvn":
            p.add_argument("--apply", action="store_true", help="also write normalized features")
        elif name == "inspect":
            p.add_argument("utt_id")
        elif name == "synth":
            p.add_argument("--num-utts", type=int, default=20)
            p.add_argument("--word-ctm", action="store_true", help="word-level instead of per-character CTM")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {key: getattr(args, key, None)
                 for key in (*PATH_KEYS, "ratios", "target_size", "r7_final",
                             "seed", "workers", "rules")}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            _err(f"--set expects KEY=VALUE, got {item!r}")
            return FATAL
        overrides[key] = value
    fn, required, _ = COMMANDS[args.command]
    try:
        cfg = build_config(args.config, overrides)
        cfg.validate(required)
        return fn(cfg, args)
    except (CommandError, ConfigError, LexiconError, AlignmentError, ArchiveError, FeatureError,
            InsufficientSource, ValueError, OSError) as exc:
        _err(f"error: {exc}")
        return FATAL


if __name__ == "__main__":
    sys.exit(main())
