"""Command line entry point.

Exit status: 0 success, 1 usage error, 2 file format error, 3 contract
violation (bad arguments for an operation, mismatched inputs, broken
callbacks). Errors print one line naming the module that raised them.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import formats, gridcore, iacn, labelspace, losskit, metrics, panopticlab, patchwork, zoomplan
from .config import load_config
from .errors import ContractViolation, FormatError, InvalidInputError

EXIT_USAGE, EXIT_FORMAT, EXIT_CONTRACT = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage().strip()}")


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()] if text else []


def _pairs(text: str) -> list[tuple[int, int]]:
    out = []
    for item in text.split(","):
        a, sep, b = item.partition(":")
        if not sep:
            raise UsageError(f"pair {item!r} is not of the form a:b")
        out.append((int(a), int(b)))
    return out


def _csv_writer(path):
    fh = open(path, "w", newline="") if path else sys.stdout
    return fh, csv.writer(fh, lineterminator="\n")


def _close(fh):
    if fh is not sys.stdout:
        fh.close()


def _read_labels(path) -> np.ndarray:
    arr = formats.read_any(path)
    if not np.issubdtype(arr.dtype, np.integer):
        raise InvalidInputError(f"{path}: expected an integer label grid, got {arr.dtype}")
    return arr.astype(np.int64)


def _read_semantic(path) -> tuple[np.ndarray, np.ndarray | None]:
    """Class ids plus the soft scores if the file held (H, W, C) floats."""
    arr = formats.read_any(path)
    if arr.ndim == 3 and np.issubdtype(arr.dtype, np.floating):
        soft = arr.astype(np.float64)
        return labelspace.argmax_decode(soft), soft
    if arr.ndim == 2 and np.issubdtype(arr.dtype, np.integer):
        return arr.astype(np.int64), None
    raise InvalidInputError(f"{path}: expected (H, W) ids or (H, W, C) scores, got {arr.dtype} {arr.shape}")


def _read_panoptic(path, things=None) -> panopticlab.PanopticGrid:
    return panopticlab.PanopticGrid.decode(formats.read_any(path), things or None)


def _read_field(path) -> panopticlab.CenterOffsetField:
    return panopticlab.CenterOffsetField.from_stacked(formats.read_tensor(path))


# -- commands ---------------------------------------------------------------

def cmd_onehot(args, cfg):
    labels = _read_labels(args.inp)
    formats.write_tensor(labelspace.one_hot_encode(labels, args.num_classes), args.out)


def cmd_boundary(args, cfg):
    pan = _read_panoptic(args.inp)
    formats.write_tensor(labelspace.get_boundary(pan).astype(np.uint16), args.out)


def cmd_panoptic_targets(args, cfg):
    pan = _read_panoptic(args.inp, _int_list(args.things))
    sigma = cfg.panoptic.sigma if args.sigma is None else args.sigma
    formats.write_tensor(panopticlab.render_targets(pan, sigma).stacked(), args.out)


def _group(semantic, field, things, cfg):
    p = cfg.panoptic
    centers = panopticlab.detect_centers(field.heatmap, p.threshold, p.nms_radius, p.max_centers)
    ids, fallback = panopticlab.group_pixels(semantic, centers, field, things)
    if fallback:
        print("panopticlab: no centers detected; thing pixels merged into one instance",
              file=sys.stderr)
    pan, dissolved = panopticlab.fuse_majority(semantic, ids, things)
    if dissolved:
        print(f"panopticlab: dissolved instances without thing labels: {dissolved}",
              file=sys.stderr)
    return pan


def _apply_panoptic_overrides(args, cfg):
    for name in ("threshold", "nms_radius", "max_centers"):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg.panoptic, name, v)


def cmd_panoptic_group(args, cfg):
    _apply_panoptic_overrides(args, cfg)
    semantic, _ = _read_semantic(args.semantic)
    pan = _group(semantic, _read_field(args.field), _int_list(args.things), cfg)
    formats.write_tensor(pan.encode(), args.out)


def _crop_ratio(args, cfg):
    return cfg.frame.crop_ratio if args.crop_ratio is None else args.crop_ratio


def cmd_iacn(args, cfg):
    pan = _read_panoptic(args.panoptic)
    region = gridcore.center_crop(*pan.shape, _crop_ratio(args, cfg))
    image = formats.read_any(args.image).astype(np.float64)
    formats.write_tensor(iacn.iacn_feature(image, pan, region), args.out)


def cmd_patch_sample(args, cfg):
    pc = cfg.patch
    h = cfg.frame.height if args.height is None else args.height
    w = cfg.frame.width if args.width is None else args.width
    size = pc.size if args.size is None else args.size
    count = pc.count if args.count is None else args.count
    region = gridcore.center_crop(h, w, _crop_ratio(args, cfg))
    rng = np.random.default_rng(args.seed)
    triples = patchwork.make_triples(rng, h, w, region, size, count, pc.references)
    fh, out = _csv_writer(args.out)
    header = ["seed", "index", "size", "patch_top", "patch_left"]
    for j in range(pc.references):
        header += [f"ref{j}_top", f"ref{j}_left"]
    out.writerow(header)
    for i, t in enumerate(triples):
        row = [args.seed, i, t.patch_size, t.patch_rect.top, t.patch_rect.left]
        for r in t.reference_rects:
            row += [r.top, r.left]
        out.writerow(row)
    _close(fh)


def _layers(paths):
    return [formats.read_tensor(p).astype(np.float64) for p in paths]


def _loss_closures(args, cfg):
    """(name, value-only evaluation, list of (point, loss-of-point) pairs)."""
    kind = args.kind
    preds = _layers(args.pred)
    targets = _layers(args.target or [])
    gamma = cfg.loss.gamma if args.gamma is None else args.gamma

    def need_target():
        if len(targets) != len(preds):
            raise UsageError(f"loss {kind} needs one --target per --pred")

    if kind in ("ce", "focal", "bce", "boundary"):
        need_target()
        fn = {"ce": losskit.ce_one_sided, "bce": losskit.bce,
              "focal": lambda z, y: losskit.focal(z, y, gamma),
              "boundary": lambda z, y: losskit.boundary_ce(z, y, cfg.loss.boundary_loss)}[kind]
        z, y = preds[0], targets[0]
        return fn(z, y), [(z, lambda x: fn(x, y))]
    if kind == "lsgan":
        z = preds[0]
        return (losskit.lsgan(z, args.target_value),
                [(z, lambda x: losskit.lsgan(x, args.target_value))])
    if kind == "hinge-d":
        need_target()
        fake, real = preds[0], targets[0]

        def fake_only(x):
            r = losskit.hinge_gan(real, x, "discriminator")
            return losskit.LossEval(r.value, r.grad[1])
        return losskit.hinge_gan(real, fake, "discriminator"), [(fake, fake_only)]
    if kind == "hinge-g":
        fake = preds[0]

        def gen(x):
            r = losskit.hinge_gan(None, x, "generator")
            return losskit.LossEval(r.value, r.grad[1])
        return losskit.hinge_gan(None, fake, "generator"), [(fake, gen)]
    if kind in ("fm", "vgg"):
        need_target()
        fn = losskit.feature_matching if kind == "fm" else losskit.perceptual_l1
        checks = []
        for i in range(len(preds)):
            def layer(x, i=i):
                feats = list(preds)
                feats[i] = x
                r = fn(targets, feats)
                return losskit.LossEval(r.value, r.grad[i])
            checks.append((preds[i], layer))
        return fn(targets, preds), checks
    if kind == "kld":
        need_target()
        mu, logvar = preds[0], targets[0]
        return losskit.kld_gaussian(mu, logvar), [
            (mu, lambda x: losskit.LossEval(*_pick(losskit.kld_gaussian(x, logvar), 0))),
            (logvar, lambda x: losskit.LossEval(*_pick(losskit.kld_gaussian(mu, x), 1))),
        ]
    if kind == "cooccur":
        return losskit.cooccur_nll(preds[0]), [(preds[0], losskit.cooccur_nll)]
    if kind == "center-offset":
        need_target()
        pred = panopticlab.CenterOffsetField.from_stacked(preds[0])
        gt = panopticlab.CenterOffsetField.from_stacked(targets[0])
        if args.mask:
            gt = panopticlab.CenterOffsetField(gt.heatmap, gt.offsets,
                                               formats.read_tensor(args.mask) != 0)
        wc, wo = cfg.loss.w_center, cfg.loss.w_offset

        def stacked(x):
            r = losskit.center_offset_loss(panopticlab.CenterOffsetField.from_stacked(x), gt, wc, wo)
            return losskit.LossEval(r.value, np.concatenate([r.grad[0][..., None], r.grad[1]], axis=2))
        return losskit.center_offset_loss(pred, gt, wc, wo), [(preds[0], stacked)]
    raise UsageError(f"unknown loss kind {kind!r}")


def _pick(res, i):
    return res.value, res.grad[i]


def cmd_loss(args, cfg):
    if not args.pred:
        raise UsageError("loss needs at least one --pred")
    res, checks = _loss_closures(args, cfg)
    if args.action == "eval":
        print("kind,value")
        print(f"{args.kind},{res.value!r}")
    else:
        eps = cfg.loss.grad_epsilon if args.epsilon is None else args.epsilon
        err = max(losskit.grad_check(fn, point, eps) for point, fn in checks)
        print("kind,max_rel_error")
        print(f"{args.kind},{err!r}")


def _load_class_grids(manifest, panoptic):
    grids = []
    for path in formats.read_manifest(manifest):
        arr = formats.read_any(path)
        if panoptic:
            arr = panopticlab.PanopticGrid.decode(arr).class_ids
        grids.append(arr)
    return grids


def cmd_socc(args, cfg):
    pairs = _pairs(args.pairs)
    min_pixels = cfg.metrics.min_pixels if args.min_pixels is None else args.min_pixels
    train = _load_class_grids(args.train, args.panoptic)
    if not train:
        raise InvalidInputError("empty training manifest")
    region = gridcore.center_crop(*np.shape(train[0])[:2], _crop_ratio(args, cfg))
    t_table = metrics.cooccur_table(train, region, pairs, min_pixels)
    g_table = None
    if args.gen:
        g_table = metrics.cooccur_table(_load_class_grids(args.gen, args.panoptic),
                                        region, pairs, min_pixels)
    fh, out = _csv_writer(args.out)
    if g_table is None:
        out.writerow(["pair", "N_a", "N_ab", "p"])
    else:
        out.writerow(["pair", "N_a", "N_ab", "p", "N_a_gen", "N_ab_gen", "p_gen", "s"])
    fmt = lambda p: "" if p is None else repr(p)
    for pair in pairs:
        t = t_table[pair]
        row = [f"{pair[0]}:{pair[1]}", t.n_a, t.n_ab, fmt(t.p)]
        if g_table is not None:
            g = g_table[pair]
            s = metrics.socc(t_table, g_table, pair) if t.defined and g.defined else None
            row += [g.n_a, g.n_ab, fmt(g.p), fmt(s)]
        out.writerow(row)
    _close(fh)


def cmd_crop_stats(args, cfg):
    mc = cfg.metrics
    k = mc.crop_k if args.k is None else args.k
    bins = mc.bins if args.bins is None else args.bins
    data = [panopticlab.PanopticGrid.decode(formats.read_any(p))
            for p in formats.read_manifest(args.manifest)]
    hist = metrics.crop_ratio_stats(data, k, bins, mc.max_percent)
    if hist.excluded:
        print(f"metrics: {hist.excluded} image(s) without instances inside the crop excluded",
              file=sys.stderr)
    fh, out = _csv_writer(args.out)
    out.writerow(["k", "bin_lo_percent", "bin_hi_percent", "fraction"])
    for lo, hi, frac in zip(hist.edges[:-1], hist.edges[1:], hist.fractions):
        out.writerow([k, repr(float(lo)), repr(float(hi)), repr(float(frac))])
    _close(fh)


def _schedule(args, cfg):
    zc = cfg.zoom
    return dict(
        steps=zc.steps if args.steps is None else args.steps,
        frames_per_transition=zc.frames_per_transition if args.frames is None else args.frames,
        intro_frames=zc.intro_frames if args.intro is None else args.intro,
    )


def cmd_zoom_schedule(args, cfg):
    h = cfg.frame.height if args.height is None else args.height
    w = cfg.frame.width if args.width is None else args.width
    sched = zoomplan.build_schedule((h, w), **_schedule(args, cfg))
    fh, out = _csv_writer(args.out)
    out.writerow(["frame", "image", "top", "left", "height", "width", "out_height", "out_width"])
    for i, f in enumerate(sched.frames):
        r = f.region
        out.writerow([i, f.image_index, r.top, r.left, r.height, r.width, *f.out_dims])
    _close(fh)


def cmd_zoom_render(args, cfg):
    names = sorted(n for n in os.listdir(args.images_dir)
                   if os.path.splitext(n)[1].lower() in (".ppm", ".pgm", ".pnm", ".smt"))
    if len(names) < 2:
        raise InvalidInputError(f"{args.images_dir}: need the input plus at least one extrapolation")
    images = [formats.read_any(os.path.join(args.images_dir, n)).astype(np.float64) for n in names]
    params = _schedule(args, cfg)
    if args.steps is None:
        params["steps"] = len(images) - 1
    sched = zoomplan.build_schedule(images[0].shape[:2], **params)
    images = images[:sched.steps + 1]
    zoomplan.check_images(sched, images)
    os.makedirs(args.out_dir, exist_ok=True)
    ext = args.format or os.path.splitext(names[0])[1].lstrip(".").lower()
    for i, spec in enumerate(sched.frames):
        frame = zoomplan.render_frame(spec, images)
        path = os.path.join(args.out_dir, f"frame_{i:05d}.{ext}")
        if ext == "smt":
            formats.write_tensor(frame, path)
        else:
            formats.write_image_pnm(np.clip(np.rint(frame), 0, 255).astype(np.uint8), path)


def cmd_pipeline(args, cfg):
    _apply_panoptic_overrides(args, cfg)
    things = _int_list(args.things)
    semantic, soft = _read_semantic(args.semantic)
    if soft is None:
        if args.num_classes is None:
            raise UsageError("integer --semantic input needs --num-classes")
        soft = labelspace.one_hot_encode(semantic, args.num_classes)
    elif args.num_classes is not None and soft.shape[2] != args.num_classes:
        soft = soft[..., :args.num_classes]
        semantic = labelspace.argmax_decode(soft)
    if args.hard_semantic:
        soft = labelspace.one_hot_encode(semantic, soft.shape[2])
    field = _read_field(args.field)
    pan = _group(semantic, field, things, cfg)
    H, W = semantic.shape
    region = gridcore.center_crop(H, W, _crop_ratio(args, cfg))
    image = formats.read_any(args.image).astype(np.float64)
    if image.ndim == 2:
        image = image[..., None]
    if image.shape[:2] != (region.height, region.width):
        raise InvalidInputError(
            f"input image {image.shape[:2]} does not match crop {region.height}x{region.width}")
    boundary = labelspace.get_boundary(pan).astype(np.float64)
    feature = iacn.iacn_feature(image, pan, region)
    padded = gridcore.zero_pad(image, region, H, W)
    xcom = np.concatenate([soft, padded, boundary[..., None], feature], axis=2)
    formats.write_tensor(xcom, args.out)
    if args.panoptic_out:
        formats.write_tensor(pan.encode(), args.panoptic_out)


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="seed for every random draw (default 0)")
    common.add_argument("--config", default=argparse.SUPPRESS,
                        help="key=value file overriding defaults, e.g. panoptic.sigma=8")

    p = _Parser(prog="extrapkit", description="Image-extrapolation pipeline tooling.")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None)
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    sp = add("onehot", cmd_onehot, "one-hot encode a label grid")
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--num-classes", type=int, required=True)
    sp.add_argument("--out", required=True)

    sp = add("boundary", cmd_boundary, "instance boundary map of a packed panoptic grid")
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--out", required=True)

    sp = add("panoptic-targets", cmd_panoptic_targets, "render center heatmap and offsets")
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--things", default="", help="comma-separated thing class ids")
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--out", required=True)

    def grouping_opts(sp):
        sp.add_argument("--things", default="", help="comma-separated thing class ids")
        sp.add_argument("--threshold", type=float)
        sp.add_argument("--nms-radius", type=int)
        sp.add_argument("--max-centers", type=int)

    sp = add("panoptic-group", cmd_panoptic_group, "group predicted centers/offsets into a panoptic map")
    sp.add_argument("--semantic", required=True)
    sp.add_argument("--field", required=True, help="(H, W, 3) heatmap + offsets tensor")
    grouping_opts(sp)
    sp.add_argument("--out", required=True)

    sp = add("iacn", cmd_iacn, "instance-aware context normalization feature")
    sp.add_argument("--image", required=True, help="input crop (.ppm or .smt)")
    sp.add_argument("--panoptic", required=True)
    sp.add_argument("--crop-ratio", type=float)
    sp.add_argument("--out", required=True)

    sp = add("patch-sample", cmd_patch_sample, "sample patch discriminator geometry as CSV")
    for name in ("--height", "--width", "--size", "--count"):
        sp.add_argument(name, type=int)
    sp.add_argument("--crop-ratio", type=float)
    sp.add_argument("--out")

    sp = add("loss", cmd_loss, "evaluate a loss or check its gradient")
    sp.add_argument("action", choices=["eval", "grad-check"])
    sp.add_argument("--kind", required=True,
                    choices=["ce", "focal", "bce", "boundary", "lsgan", "hinge-d", "hinge-g", "fm", "vgg",
                             "kld", "cooccur", "center-offset"])
    sp.add_argument("--pred", action="append", default=[],
                    help="prediction tensor (fake scores, fake features, mu, ...); repeatable")
    sp.add_argument("--target", action="append",
                    help="target tensor (labels, real scores/features, logvar, ...); repeatable")
    sp.add_argument("--target-value", type=float, default=1.0, help="lsgan target")
    sp.add_argument("--mask", help="thing mask for center-offset")
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--epsilon", type=float)

    sp = add("socc", cmd_socc, "co-occurrence table and similarity as CSV")
    sp.add_argument("--train", required=True, help="manifest of training label maps")
    sp.add_argument("--gen", help="manifest of generated label maps")
    sp.add_argument("--pairs", required=True, help="class pairs a:b,c:d")
    sp.add_argument("--crop-ratio", type=float)
    sp.add_argument("--min-pixels", type=int)
    sp.add_argument("--panoptic", action="store_true", help="manifest files are packed panoptic grids")
    sp.add_argument("--out")

    sp = add("crop-stats", cmd_crop_stats, "outside/inside instance ratio histogram")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--k", type=float)
    sp.add_argument("--bins", type=int)
    sp.add_argument("--out")

    def zoom_opts(sp):
        sp.add_argument("--steps", type=int)
        sp.add_argument("--frames", type=int, help="frames per transition")
        sp.add_argument("--intro", type=int, help="intro frames")

    sp = add("zoom-schedule", cmd_zoom_schedule, "infinite-zoom frame plan as CSV")
    sp.add_argument("--height", type=int)
    sp.add_argument("--width", type=int)
    zoom_opts(sp)
    sp.add_argument("--out")

    sp = add("zoom-render", cmd_zoom_render, "render zoom frames from extrapolations")
    sp.add_argument("--images-dir", required=True,
                    help="input then extrapolations, in sorted filename order")
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--format", choices=["ppm", "pgm", "smt"])
    zoom_opts(sp)

    sp = add("pipeline", cmd_pipeline, "assemble the stage-4 conditioning tensor")
    sp.add_argument("--semantic", required=True, help="extrapolated label scores (H, W, C) or ids")
    sp.add_argument("--field", required=True, help="(H, W, 3) predicted heatmap + offsets")
    sp.add_argument("--image", required=True, help="input crop")
    sp.add_argument("--num-classes", type=int,
                    help="class channel count; extra score channels (e.g. boundary) are dropped")
    sp.add_argument("--crop-ratio", type=float)
    sp.add_argument("--hard-semantic", action="store_true",
                    help="use the one-hot of the argmax instead of raw scores")
    sp.add_argument("--panoptic-out")
    sp.add_argument("--out", required=True)
    grouping_opts(sp)
    return p


def _origin_module(exc: BaseException) -> str:
    tb = exc.__traceback__
    name = "extrapkit"
    while tb is not None:
        mod = tb.tb_frame.f_globals.get("__name__", "")
        if mod.startswith("extrapkit."):
            name = mod.split(".", 1)[1]
        tb = tb.tb_next
    return name


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args.config)
        return args.func(args, cfg) or 0
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (KeyError, ValueError) as e:
        if isinstance(e, FormatError):
            print(f"{_origin_module(e)}: format error: {e}", file=sys.stderr)
            return EXIT_FORMAT
        if isinstance(e, InvalidInputError):
            print(f"{_origin_module(e)}: contract violation: {e}", file=sys.stderr)
            return EXIT_CONTRACT
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ContractViolation as e:
        print(f"{_origin_module(e)}: contract violation: {e}", file=sys.stderr)
        return EXIT_CONTRACT
    except OSError as e:
        print(f"cli: cannot access {e.filename}: {e.strerror}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
