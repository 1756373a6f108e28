"""coarse-cover: command line front end.

Usage: coarse-cover <command> --config cfg.json [--seed N] [--out DIR]
                    [--budget M] [--tol X] [--no-figures]

Commands: growth, delta, dist, nerve, norm, obstruct, qi-fit, embed-check.

The config is a JSON object with a named-object table under "objects"
plus one section per command; see the README for the schema.  Each run
writes report.json to the output directory together with CSV side files
and, unless --no-figures is given, PNG figures for plottable results.

Exit codes: 0 success, 2 configuration error, 3 computation error,
4 resource limit exceeded.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import coverings, decomposition, embeddings, groups, invariants, report
from .errors import CoarseCoverError, ConfigError, ResourceLimit


def _build_group(cfg):
    kind = cfg.get("kind")
    if kind == "free_abelian":
        return groups.FreeAbelian(int(cfg.get("k", 1)))
    if kind == "heisenberg":
        return groups.DiscreteHeisenberg(int(cfg.get("n", 1)))
    if kind == "free_group":
        return groups.FreeGroup(int(cfg.get("rank", 2)))
    if kind == "sl2z":
        return groups.SL2Z()
    if kind == "engel":
        return groups.EngelLattice()
    raise ConfigError(f"unknown group kind {kind!r}")


def _build_covering(cfg, objects):
    kind = cfg.get("kind")
    if kind == "uniform_grid":
        return coverings.UniformGrid(int(cfg.get("k", 1)))
    if kind == "dyadic_annuli":
        return coverings.DyadicAnnuli(
            int(cfg.get("n", 1)), subdivision=int(cfg.get("subdivision", 1))
        )
    if kind == "heisenberg_cubes":
        return coverings.HeisenbergCubes()
    if kind == "group_translates":
        model = _resolve(objects, cfg.get("group"), "group")
        return coverings.GroupTranslates(model, r=int(cfg.get("r", 1)))
    if kind == "explicit":
        sets = {k: frozenset(tuple(p) if isinstance(p, list) else p for p in v)
                for k, v in cfg.get("sets", {}).items()}
        return coverings.ExplicitFinite(sets)
    raise ConfigError(f"unknown covering kind {kind!r}")


def _build_function(cfg):
    if "csv" in cfg:
        return decomposition.SampledFunction.read_csv(cfg["csv"], name=cfg.get("name", ""))
    preset = cfg.get("preset")
    dim = int(cfg.get("dim", 1))
    n = int(cfg.get("points", 256))
    halfwidth = float(cfg.get("halfwidth", 8.0))
    if preset == "gaussian":
        return decomposition.gaussian(dim=dim, halfwidth=halfwidth, n=n)
    if preset == "one":
        return decomposition.constant_one(-halfwidth, halfwidth, n, dim=dim)
    raise ConfigError(f"function needs a csv path or a known preset, got {cfg!r}")


def _build_pairs(cfg):
    if "values" in cfg:
        return [(float(a), float(b)) for a, b in cfg["values"]]
    if "csv" in cfg:
        import csv as _csv

        out = []
        with open(cfg["csv"], newline="") as fh:
            reader = _csv.reader(fh)
            header = next(reader)
            if len(header) < 2:
                raise ConfigError(f"pairs CSV needs two columns, got header {header}")
            for row in reader:
                out.append((float(row[0]), float(row[1])))
        return out
    raise ConfigError("pairs object needs 'values' or 'csv'")


_BUILDERS = {
    "group": _build_group,
    "covering": _build_covering,
    "function": lambda cfg, objects=None: _build_function(cfg),
    "pairs": lambda cfg, objects=None: _build_pairs(cfg),
}


def _resolve(objects, name, expect):
    if name is None:
        raise ConfigError(f"missing object reference of type {expect!r}")
    if name not in objects:
        raise ConfigError(f"unknown object {name!r}")
    typ, cfg, cache = objects[name]
    if typ != expect:
        raise ConfigError(f"object {name!r} has type {typ!r}, expected {expect!r}")
    if cache is None:
        builder = _BUILDERS[typ]
        cache = builder(cfg, objects) if typ == "covering" else builder(cfg)
        objects[name] = (typ, cfg, cache)
    return cache


def _parse_point(raw):
    return coverings.as_point([Fraction(str(c)) for c in raw])


def _fmt(x):
    if isinstance(x, float):
        return x
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    return x


def cmd_growth(cfg, objects, opts):
    section = cfg.get("growth")
    if not section:
        raise ConfigError("config has no 'growth' section")
    r_max = int(section.get("r_max", 10))
    if "group" in section:
        model = _resolve(objects, section["group"], "group")
        profile = groups.growth_function(
            model, model.default_generators(), r_max, budget=opts.budget
        )
    elif "covering" in section:
        spec = _resolve(objects, section["covering"], "covering")
        nerve = coverings.build_nerve(spec, section.get("window", 2 * r_max))
        base = section.get("base")
        if base is None:
            base = nerve.indices[len(nerve.indices) // 2]
        else:
            base = spec.parse_index(base) if isinstance(base, str) else tuple(base)
        profile = coverings.nerve_growth_profile(nerve, base, r_max)
    else:
        raise ConfigError("'growth' needs a 'group' or 'covering' reference")
    cls = invariants.classify_growth(profile)
    out = opts.out
    profile.write_csv(os.path.join(out, "growth.csv"))
    if opts.figures:
        report.growth_figure(os.path.join(out, "growth.png"), profile, cls)
    return {
        "source": profile.source,
        "radii": profile.radii,
        "ball_sizes": profile.sizes,
        "classification": {
            "kind": cls.kind,
            "degree": _fmt(cls.degree),
            "rate": _fmt(cls.rate),
            "bound": cls.bound,
            "residual": _fmt(cls.residual),
        },
    }


def cmd_delta(cfg, objects, opts):
    section = cfg.get("delta")
    if not section:
        raise ConfigError("config has no 'delta' section")
    model = _resolve(objects, section.get("group"), "group")
    radii = section.get("radii", [2, 4, 6, 8])
    trend = invariants.hyperbolicity_trend(
        model, radii=radii, budget=opts.budget, seed=opts.seed
    )
    out = opts.out
    trend.profile.write_csv(os.path.join(out, "delta.csv"))
    if opts.figures:
        report.delta_figure(os.path.join(out, "delta.png"), trend.profile, trend)
    return {
        "source": trend.profile.source,
        "radii": trend.profile.radii,
        "deltas": trend.profile.deltas,
        "sample_sizes": trend.profile.sample_sizes,
        "subsampled": trend.profile.subsampled,
        "trend": {"kind": trend.kind, "slope": trend.slope, "delta_max": trend.delta_max},
    }


def cmd_dist(cfg, objects, opts):
    section = cfg.get("dist")
    if not section:
        raise ConfigError("config has no 'dist' section")
    results = []
    if "covering" in section:
        spec = _resolve(objects, section["covering"], "covering")
        nerve = coverings.build_nerve(spec, section.get("window", 8))
        for raw_x, raw_y in section.get("pairs", []):
            x, y = _parse_point(raw_x), _parse_point(raw_y)
            d = coverings.chain_distance(nerve, x, y)
            results.append({"x": [str(c) for c in x], "y": [str(c) for c in y], "distance": d})
    elif "group" in section:
        model = _resolve(objects, section["group"], "group")
        gens = model.default_generators()
        cap = int(section.get("cap", 20))
        for raw_g, raw_h in section.get("pairs", []):
            g, h = model.parse_element(raw_g), model.parse_element(raw_h)
            d = groups.word_distance(model, gens, g, h, cap)
            results.append({"x": raw_g, "y": raw_h, "distance": d})
    else:
        raise ConfigError("'dist' needs a 'covering' or 'group' reference")
    report.write_rows_csv(
        os.path.join(opts.out, "distances.csv"),
        ["x", "y", "distance"],
        [[json.dumps(r["x"]), json.dumps(r["y"]), r["distance"]] for r in results],
    )
    return {"pairs": results}


def cmd_nerve(cfg, objects, opts):
    section = cfg.get("nerve")
    if not section:
        raise ConfigError("config has no 'nerve' section")
    spec = _resolve(objects, section.get("covering"), "covering")
    nerve = coverings.build_nerve(spec, section.get("window", 8))
    nerve.write_edge_csv(os.path.join(opts.out, "nerve_edges.csv"))
    return {
        "covering": spec.kind,
        "window": section.get("window", 8),
        "vertices": len(nerve.indices),
        "interior_vertices": len(nerve.interior),
        "admissibility_constant": nerve.admissibility_constant() if nerve.interior else None,
        "connected": nerve.is_connected(),
    }


def cmd_norm(cfg, objects, opts):
    section = cfg.get("norm")
    if not section:
        raise ConfigError("config has no 'norm' section")
    kind = section.get("kind")
    out = opts.out
    if kind == "iwasawa":
        fn, tail = decomposition.iwasawa_example()
        value = decomposition.sl2_l1_norm(
            fn,
            x_max=float(section.get("x_max", 7.0)),
            y_max=float(section.get("y_max", 45.0)),
            tol=opts.tol if opts.tol is not None else 1e-3,
            tail_bound=tail,
        )
        return {"kind": kind, "value": value}
    f = _resolve(objects, section.get("function"), "function")
    p = float(section.get("p", 2))
    q = float(section.get("q", 2))
    if kind == "modulation":
        value = decomposition.modulation_norm(f, p, q)
        return {"kind": kind, "p": p, "q": q, "value": value}
    if kind == "besov":
        res = decomposition.besov_norm(
            f, s=float(section.get("s", 0.0)), p=p, q=q, window=section.get("window")
        )
    elif kind == "decomposition":
        spec = _resolve(objects, section.get("covering"), "covering")
        bapu = decomposition.build_bapu(
            spec,
            window=section.get("window"),
            indices=[tuple(i) if isinstance(i, list) else i for i in section["indices"]]
            if "indices" in section
            else None,
            order=int(section.get("order", 1)),
        )
        res = decomposition.decomposition_norm(
            f, bapu, p, q, mode=section.get("mode", "Lp"), refine_tol=opts.tol
        )
    else:
        raise ConfigError(f"unknown norm kind {kind!r}")
    locals_fmt = {str(i): v for i, v in res.locals.items()}
    report.write_rows_csv(
        os.path.join(out, "local_norms.csv"), ["index", "local_norm"], list(locals_fmt.items())
    )
    if opts.figures:
        report.locals_figure(
            os.path.join(out, "local_norms.png"), locals_fmt, title=f"{kind} local norms"
        )
    return {
        "kind": kind,
        "p": p,
        "q": q,
        "value": res.value,
        "locals": locals_fmt,
        "warnings": res.warnings,
    }


def _space_profile(name, section, objects, opts):
    spec = section["spaces"][name]
    r_max = int(spec.get("r_max", 10))
    if spec.get("type") == "group":
        model = _resolve(objects, spec["object"], "group")
        profile = groups.growth_function(
            model, model.default_generators(), r_max, budget=opts.budget
        )
        trend = None
        if spec.get("radii"):
            trend = invariants.hyperbolicity_trend(
                model, radii=spec["radii"], budget=opts.budget, seed=opts.seed
            )
        return {"name": name, "growth": invariants.classify_growth(profile), "trend": trend}
    if spec.get("type") == "covering":
        cov = _resolve(objects, spec["object"], "covering")
        nerve = coverings.build_nerve(cov, spec.get("window", 2 * r_max))
        base = nerve.indices[len(nerve.indices) // 2]
        profile = coverings.nerve_growth_profile(nerve, base, r_max)
        return {"name": name, "growth": invariants.classify_growth(profile)}
    raise ConfigError(f"space {name!r} needs type 'group' or 'covering'")


def cmd_obstruct(cfg, objects, opts):
    section = cfg.get("obstruct")
    if not section:
        raise ConfigError("config has no 'obstruct' section")
    if "a" not in section or "b" not in section:
        raise ConfigError("'obstruct' needs space labels 'a' and 'b'")
    pa = _space_profile(section["a"], section, objects, opts)
    pb = _space_profile(section["b"], section, objects, opts)
    rep = invariants.qi_obstruction_report(pa, pb)
    return {
        "a": section["a"],
        "b": section["b"],
        "verdict": rep.verdict,
        "evidence": {k: _fmt(v) for k, v in rep.evidence.items()},
        "note": rep.note,
    }


def cmd_qi_fit(cfg, objects, opts):
    section = cfg.get("qi_fit")
    if not section:
        raise ConfigError("config has no 'qi_fit' section")
    pairs = _resolve(objects, section.get("pairs"), "pairs")
    res = embeddings.fit_qi_parameters(
        pairs, l_max=float(section.get("l_max", 10)), c_max=float(section.get("c_max", 10))
    )
    if not res.feasible:
        return {
            "feasible": False,
            "witness": list(res.witness),
            "violation": res.violation,
        }
    return {"feasible": True, "L": res.L, "C": res.C}


def cmd_embed_check(cfg, objects, opts):
    section = cfg.get("embed_check")
    if not section:
        raise ConfigError("config has no 'embed_check' section")
    construction = section.get("construction")
    if construction == "dyadic_power":
        rep = embeddings.dyadic_power_embedding(
            int(section.get("n", 2)), p=float(section.get("p", 2))
        )
        return {
            "construction": construction,
            "n": rep.n,
            "p": rep.p,
            "norm_ratio": rep.norm_ratio,
            "expected_ratio": rep.expected_ratio,
            "ratio_error": rep.ratio_error,
            "qi": {"L": rep.qi_fit.L, "C": rep.qi_fit.C, "dominated": rep.qi_dominated},
            "scaled_index_map": rep.scaled_map.kind,
            "unscaled_index_map": rep.unscaled_map.kind,
            "unscaled_missing": [int(i) for i in rep.unscaled_map.missing[:16]],
        }
    if construction == "tensor":
        f = _resolve(objects, section.get("f"), "function")
        eta = _resolve(objects, section.get("eta"), "function")
        rep = embeddings.tensor_embedding(
            f, eta, p=float(section.get("p", 2)), q=float(section.get("q", 2))
        )
        return {
            "construction": construction,
            "norm_f": rep.norm_f,
            "norm_eta": rep.norm_eta,
            "norm_tensor": rep.norm_tensor,
            "factor_error": rep.factor_error,
            "composition_error": rep.composition_error,
        }
    raise ConfigError(f"unknown construction {construction!r}")


_COMMANDS = {
    "growth": cmd_growth,
    "delta": cmd_delta,
    "dist": cmd_dist,
    "nerve": cmd_nerve,
    "norm": cmd_norm,
    "obstruct": cmd_obstruct,
    "qi-fit": cmd_qi_fit,
    "embed-check": cmd_embed_check,
}


def _load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("top-level config must be a JSON object")
    return cfg


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="coarse-cover",
        description="Large-scale invariants and decomposition-space norms.",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="JSON config path")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--budget", type=int, default=groups.DEFAULT_BUDGET)
    parser.add_argument("--tol", type=float, default=None)
    parser.add_argument("--no-figures", dest="figures", action="store_false")
    opts = parser.parse_args(argv)
    try:
        cfg = _load_config(opts.config)
        objects = {}
        for name, ocfg in cfg.get("objects", {}).items():
            if not isinstance(ocfg, dict) or "type" not in ocfg:
                raise ConfigError(f"object {name!r} needs a 'type' field")
            if ocfg["type"] not in _BUILDERS:
                raise ConfigError(f"object {name!r} has unknown type {ocfg['type']!r}")
            objects[name] = (ocfg["type"], ocfg, None)
        report.ensure_dir(opts.out)
        result = _COMMANDS[opts.command](cfg, objects, opts)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ResourceLimit as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return 4
    except CoarseCoverError as exc:
        print(f"computation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    payload = {"command": opts.command, "seed": opts.seed, "result": result}
    report.write_json(os.path.join(opts.out, "report.json"), payload)
    print(json.dumps(payload, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
