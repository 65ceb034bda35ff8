"""
Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data or I/O error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import harness, io
from .core import DataError, FeatureTable, kendall_tau
from .kernels import KernelSpec, bahsic_select, comparison_kernel, hsic_test
from .numlin import NumericalError
from .predict import predict_unseen
from .rankers import FairnessConfig, svdkfair_rank
from .synth import SynthConfig, generate

ALGO_HELP = """\
algorithms:
  serial    seriation: Fiedler vector of the Laplacian of the agreement similarity
  cserial   seriation on the agreement similarity plus lambda times a covariate kernel
  svd       top singular directions of C orthogonal to the constant vector
  svdn      as svd on the degree-normalised matrix D^-1 C
  svdc      scores linear in the covariates, r = H Phi beta (predicts unseen items)
  svdk      kernelised svdc, r = H K alpha (predicts unseen items)
  svdkfair  svdk with an HSIC penalty against the sensitive columns
  kcca      kernel CCA between covariates and comparison rows (predicts unseen items)
  rc        rank centrality on the similarity-based win-probability proxy
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _names(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _outdir(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {path}: {exc}") from None
    if not os.access(path, os.W_OK):
        raise DataError(f"output directory {path} is not writable")
    return path


def _load(args, need_features=False):
    if need_features and not args.features:
        raise UsageError("--features is required here")
    return io.load_dataset(args.comparisons, args.features, args.kind,
                           tuple(getattr(args, "sensitive", None) or ()))


def _hyper(args):
    out = {}
    if args.lam is not None:
        out["lam"] = args.lam
    if args.lengthscale is not None:
        out["lengthscale"] = args.lengthscale
    if args.epsilon is not None:
        out["epsilon"] = args.epsilon
    return out


def cmd_rank(args):
    algo = harness.canonical_algo(args.algo)
    need = algo in harness.FEATURE_ALGOS
    g, feats = _load(args, need)
    out = _outdir(args.out)
    params = _hyper(args)
    fixed = {"kernel": args.kernel}
    if algo == "svdkfair":
        fixed["fair_lam"] = args.fair_lambda
    cv = None
    tunable = algo in ("cserial", "svdk", "svdkfair", "kcca") and args.kernel == "rbf"
    if tunable and not args.no_cv and not params:
        cv = harness.cross_validate(g, feats, algo, harness.CvPlan(folds=args.folds, seed=args.seed),
                                    **fixed)
        params = cv.best
    res, model = harness.fit(algo, g, feats, **params, **fixed)
    io.write_ranking(res, g.item_ids, os.path.join(out, "ranking.csv"))
    summary = {"algo": algo, "kind": g.kind, "n": g.n, "observed_pairs": g.n_observed(),
               "upsets": res.upsets, "upset_fraction": res.upset_fraction,
               "orientation": res.orientation, "params": params,
               "diagnostics": res.diagnostics,
               "cv_score": None if cv is None else cv.score}
    io.write_json(summary, os.path.join(out, "result.json"))
    if model is not None:
        cols = [feats.column_names[k] for k in model.feature_columns]
        io.save_model(model, os.path.join(out, "model.json"), cols)
    print(f"{algo}: {res.upsets} upsets of {g.n_observed()} pairs "
          f"({100 * res.upset_fraction:.2f}%)")


def cmd_predict(args):
    model = io.load_model(args.model)
    feats = io.read_features(args.features)
    out = _outdir(args.out)
    names = model.extras.get("column_names") or []
    if names:
        missing = [c for c in names if c not in feats.column_names]
        if missing:
            raise DataError(f"features file lacks column(s) {', '.join(missing)}")
        X = feats.Phi[:, [feats.column_names.index(c) for c in names]]
    else:
        X = feats.Phi
    pred = predict_unseen(model, X)
    io.write_scores(feats.item_ids, pred.scores, os.path.join(out, "predictions.csv"))
    print(f"predicted {len(pred.scores)} items")


def cmd_simulate(args):
    cfg = SynthConfig(n=args.n, sparsity=args.sparsity, sigma=args.sigma, noise=args.noise,
                      noise_level=args.level, kind=args.kind_sim, seed=args.seed)
    data = generate(cfg)
    out = _outdir(args.out)
    ids = data.graph.item_ids
    io.write_comparisons(data.graph, os.path.join(out, "comparisons.csv"))
    io.write_features(FeatureTable(data.x[:, None], ("x",)), os.path.join(out, "features.csv"), ids)
    io.write_truth(ids, data.r_true, os.path.join(out, "truth.csv"))
    print(f"{cfg.n} items, {data.graph.n_observed()} comparisons "
          f"(sparsity {data.graph.sparsity():.4f}, {data.repair_edges} repair edges)")


def cmd_sweep(args):
    base = SynthConfig(n=args.n, sparsity=args.sparsity, noise=args.noise, kind=args.kind_sim,
                       sigma=args.sigmas[0])
    plan = harness.CvPlan(folds=args.folds, seed=args.seed) if args.cv else None
    report = harness.run_noise_sweep(base, args.levels, _names(args.algos), sigmas=args.sigmas,
                                     seeds=range(args.seed, args.seed + args.seeds), plan=plan)
    out = _outdir(args.out)
    report.to_csv(os.path.join(out, "report.csv"), timing=args.timing)
    report.to_json(os.path.join(out, "report.json"), timing=args.timing)
    for row in report.aggregates():
        tau = row["kendall_tau_mean"]
        print(f"{row['algo']:9s} level={row['noise_level']:<6g} sigma={row['sigma']:<6g} "
              f"tau={'nan' if tau is None else f'{tau:.3f}'} failed={row['failed']}")


def cmd_cv(args):
    algo = harness.canonical_algo(args.algo)
    g, feats = _load(args, algo in harness.FEATURE_ALGOS)
    out = _outdir(args.out)
    plan = harness.CvPlan(folds=args.folds, seed=args.seed,
                          lambda_grid=tuple(args.lambda_grid) if args.lambda_grid else None,
                          lengthscale_grid=tuple(args.lengthscale_grid)
                          if args.lengthscale_grid else None,
                          epsilon_grid=tuple(args.epsilon_grid) if args.epsilon_grid else None)
    fixed = {"kernel": args.kernel}
    if algo == "svdkfair":
        fixed["fair_lam"] = args.fair_lambda
    cv = harness.cross_validate(g, feats, algo, plan, **fixed)
    cols = ["lam", "epsilon", "lengthscale", "score"]
    with open(os.path.join(out, "cv.csv"), "w", encoding="utf-8") as fh:
        fh.write(",".join(cols) + "\n")
        for c in cv.cells:
            fh.write(",".join("" if c.get(k) is None else repr(float(c[k])) for k in cols) + "\n")
    io.write_json({"algo": algo, "best": cv.best, "score": cv.score, "folds": args.folds},
                  os.path.join(out, "cv.json"))
    print(f"best {cv.best} with held-out upset fraction {cv.score:.4f}")


def cmd_select(args):
    g, feats = _load(args, True)
    out = _outdir(args.out)
    res = bahsic_select(feats, comparison_kernel(g.C), args.target_k,
                        drop_fraction=args.drop_fraction)
    names = [feats.column_names[k] for k in res.selected]
    trace = [{"removed": [feats.column_names[k] for k in rem], "hsic": h}
             for rem, h in res.trace]
    io.write_json({"selected": names, "selected_indices": res.selected, "trace": trace},
                  os.path.join(out, "selected.json"))
    print("selected: " + ", ".join(names))


def cmd_hsic(args):
    g, feats = _load(args, True)
    out = _outdir(args.out)
    rows = g.C
    X = feats.predictive()
    overall = hsic_test(X, rows, n_perm=args.n_perm, seed=args.seed, alpha=args.alpha)
    doc = {"all_features": _test_doc(overall), "per_feature": {}}
    for k in feats.predictive_columns:
        t = hsic_test(feats.Phi[:, k], rows, n_perm=args.n_perm, seed=args.seed, alpha=args.alpha)
        doc["per_feature"][feats.column_names[k]] = _test_doc(t)
    io.write_json(doc, os.path.join(out, "hsic.json"))
    print(f"HSIC {overall.statistic:.6g}, p = {overall.p_value:.4f} "
          f"({'dependent' if overall.reject else 'no evidence of dependence'} at {args.alpha})")


def _test_doc(t):
    return {"statistic": t.statistic, "p_value": t.p_value, "n_permutations": t.n_permutations,
            "alpha": t.reject_at, "reject": t.reject}


def cmd_fair(args):
    if not args.sensitive:
        raise UsageError("--sensitive is required for fair")
    g, feats = _load(args, True)
    out = _outdir(args.out)
    spec = KernelSpec("rbf", args.lengthscale)
    zk = KernelSpec(args.sensitive_kernel)
    Z = feats.sensitive()
    lines = ["lambda,upsets,upset_fraction,max_abs_corr"]
    for k, lam in enumerate(args.fair_lambdas):
        res, _ = svdkfair_rank(g, feats, spec, FairnessConfig(lam, zk))
        corr = max(abs(_corr(res.scores, Z[:, c])) for c in range(Z.shape[1]))
        lines.append(f"{lam!r},{res.upsets},{res.upset_fraction!r},{corr!r}")
        io.write_ranking(res, g.item_ids, os.path.join(out, f"ranking_{k}.csv"))
    with open(os.path.join(out, "fair.csv"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    print("\n".join(lines))


def _corr(a, b):
    if np.std(a) == 0 or np.std(b) == 0:
        return 0.0
    return float(np.corrcoef(a, b)[0, 1])


def build_parser():
    p = _Parser(prog="covrank", description="Spectral ranking from pairwise comparisons "
                "with item covariates.", epilog=ALGO_HELP,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, data=True):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=".", help="output directory")
        if data:
            sp.add_argument("--comparisons", required=True, help="CSV with header i,j,outcome")
            sp.add_argument("--features", help="CSV with header id,<name1>,...")
            sp.add_argument("--kind", choices=("ordinal", "cardinal", "auto"), default="auto")

    def hyper(sp):
        sp.add_argument("--lambda", dest="lam", type=float, help="cserial trade-off")
        sp.add_argument("--lengthscale", type=float, help="RBF lengthscale of the covariate kernel")
        sp.add_argument("--epsilon", type=float, help="kcca regulariser (default 0.1 n)")
        sp.add_argument("--fair-lambda", type=float, default=0.0, help="svdkfair penalty")
        sp.add_argument("--sensitive", type=_names, default=[],
                        help="comma-separated sensitive feature columns")
        sp.add_argument("--kernel", choices=("rbf", "linear"), default="rbf")
        sp.add_argument("--folds", type=int, default=10)

    sp = sub.add_parser("rank", help="rank items", epilog=ALGO_HELP,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    common(sp)
    sp.add_argument("--algo", required=True, choices=harness.ALGORITHMS + tuple(harness.ALIASES))
    hyper(sp)
    sp.add_argument("--no-cv", action="store_true",
                    help="use default hyperparameters instead of cross-validation")
    sp.set_defaults(func=cmd_rank)

    sp = sub.add_parser("predict", help="score unseen items with a saved model")
    common(sp, data=False)
    sp.add_argument("--model", required=True)
    sp.add_argument("--features", required=True)
    sp.set_defaults(func=cmd_predict)

    def synth_args(sp):
        sp.add_argument("--n", type=int, default=200)
        sp.add_argument("--sparsity", type=float, default=0.05)
        sp.add_argument("--noise", choices=("none", "flip", "ero"), default="none")
        sp.add_argument("--comparison-kind", dest="kind_sim", choices=("ordinal", "cardinal"),
                        default="cardinal")

    sp = sub.add_parser("simulate", help="write a synthetic data set")
    common(sp, data=False)
    synth_args(sp)
    sp.add_argument("--sigma", type=float, default=0.0)
    sp.add_argument("--level", type=float, default=0.0, help="FLIP p or ERO eta")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="synthetic noise sweep")
    common(sp, data=False)
    synth_args(sp)
    sp.add_argument("--levels", type=_floats, default=[0.0])
    sp.add_argument("--sigmas", type=_floats, default=[0.0])
    sp.add_argument("--seeds", type=int, default=20, help="number of seeds")
    sp.add_argument("--algos", default="serial,cserial,svdn,svdc,svdk,kcca")
    sp.add_argument("--cv", action="store_true", help="re-tune hyperparameters in every cell")
    sp.add_argument("--folds", type=int, default=10)
    sp.add_argument("--timing", action="store_true",
                    help="record wall times (otherwise written as 0 for reproducible output)")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("cv", help="cross-validate hyperparameters")
    common(sp)
    sp.add_argument("--algo", required=True, choices=harness.ALGORITHMS + tuple(harness.ALIASES))
    hyper(sp)
    sp.add_argument("--lambda-grid", type=_floats)
    sp.add_argument("--lengthscale-grid", type=_floats)
    sp.add_argument("--epsilon-grid", type=_floats)
    sp.set_defaults(func=cmd_cv)

    sp = sub.add_parser("select-features", help="BAHSIC backward feature elimination")
    common(sp)
    sp.add_argument("--target-k", type=int, required=True)
    sp.add_argument("--drop-fraction", type=float, default=0.1)
    sp.set_defaults(func=cmd_select)

    sp = sub.add_parser("hsic-test", help="permutation test of features vs comparisons")
    common(sp)
    sp.add_argument("--n-perm", type=int, default=500)
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.set_defaults(func=cmd_hsic)

    sp = sub.add_parser("fair", help="fairness / upsets trade-off of svdkfair")
    common(sp)
    sp.add_argument("--sensitive", type=_names, required=True)
    sp.add_argument("--fair-lambdas", type=_floats, default=[0.0, 1e2, 1e3, 1e4])
    sp.add_argument("--lengthscale", type=float)
    sp.add_argument("--sensitive-kernel", choices=("rbf", "linear"), default="linear")
    sp.set_defaults(func=cmd_fair)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except UsageError as exc:
        print(f"covrank: error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"covrank: data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"covrank: numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"covrank: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
