"""Command-line front end: pipeline orchestration, CSV/SVG emission, and the
validation suite as runnable commands.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.  CSV
files are deterministic: fixed schema header, 17-significant-digit floats,
no timestamps.
"""

from __future__ import annotations

import os
import sys
import zlib

import click
import numpy as np

from .config import RunConfig, emit_config, load_config
from .errors import ConfigError, FgnlsError, PipelineError

FMT = "%.17g"


def _csv_path(cfg: RunConfig, name: str) -> str:
    os.makedirs(cfg.outdir, exist_ok=True)
    return os.path.join(cfg.outdir, name)


def write_csv(path: str, schema: str, header: list[str], rows) -> None:
    lines = [f"# schema={schema} version=1", ",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, str):
                cells.append(v)
            elif isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            else:
                cells.append(FMT % float(v))
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _save_svg(fig, path: str) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})


def _build_background(cfg: RunConfig):
    from .spectrum import validate_spectrum
    from .surface import ThetaParams
    from .background import build_background
    lo = [b[0] for b in cfg.bands]
    up = [b[1] for b in cfg.bands]
    spec = validate_spectrum(lo, up, cfg.phases)
    return build_background(spec, ThetaParams(tol=cfg.theta_tol))


def _perturbed(cfg: RunConfig, ev):
    from .scattering import PerturbedInitialData, perturbation_profile
    sampler = perturbation_profile(
        cfg.perturbation_profile, ev, amplitude=cfg.perturbation_amplitude,
        width=cfg.perturbation_width, center=cfg.perturbation_center,
        support=(None if cfg.perturbation_profile == "none"
                 else cfg.perturbation_support))
    return PerturbedInitialData(cfg.support_radius, sampler, ev)


def _run(stage, fn):
    try:
        fn()
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    except FgnlsError as exc:
        click.echo(f"numerical failure in {stage}: {exc}", err=True)
        sys.exit(3)


@click.group()
def main():
    """Finite-gap NLS backgrounds, scattering, and long-time asymptotics."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--grid", default="-5,5,41,0,2,5",
              help="x0,x1,nx,t0,t1,nt evaluation grid")
@click.option("--svg/--no-svg", default=False, help="emit a |q| heatmap")
def background(config_path, grid, svg):
    """Evaluate the algebro-geometric background on a grid."""
    def body():
        cfg = load_config(config_path)
        try:
            x0, x1, nx, t0, t1, nt = (float(v) for v in grid.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad --grid: {exc}") from exc
        ev = _build_background(cfg)
        xs = np.linspace(x0, x1, int(nx))
        ts = np.linspace(t0, t1, int(nt))
        X, T = np.meshgrid(xs, ts, indexing="ij")
        from .background import q_ag
        Q = q_ag(X, T, ev)
        rows = [(x, t, q.real, q.imag, abs(q))
                for x, t, q in zip(X.ravel(), T.ravel(), Q.ravel())]
        out = _csv_path(cfg, "background.csv")
        write_csv(out, "background", ["x", "t", "re_q", "im_q", "abs_q"], rows)
        click.echo(f"wrote {out}")
        if svg:
            import matplotlib
            matplotlib.use("Agg")
            import matplotlib.pyplot as plt
            fig, ax = plt.subplots(figsize=(6, 4))
            im = ax.imshow(np.abs(Q).T, origin="lower", aspect="auto",
                           extent=(x0, x1, t0, t1), cmap="viridis")
            fig.colorbar(im, ax=ax, label="|q|")
            ax.set_xlabel("x")
            ax.set_ylabel("t")
            path = _csv_path(cfg, "background.svg")
            _save_svg(fig, path)
            click.echo(f"wrote {path}")
    _run("background", body)


@main.command("surface-report")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def surface_report(config_path):
    """Dump the period matrix, Riemann constants, and divisor."""
    def body():
        cfg = load_config(config_path)
        ev = _build_background(cfg)
        surf = ev.surface
        rows = []
        n = ev.spec.genus
        for i in range(n):
            for j in range(n):
                v = surf.period_matrix[i, j]
                rows.append(("B", i + 1, j + 1, v.real, v.imag))
        for j in range(n):
            v = surf.riemann_constants[j]
            rows.append(("K", j + 1, 0, v.real, v.imag))
        for j in range(n):
            rows.append(("divisor", j + 1, 0, surf.divisor_points[j], 0.0))
        out = _csv_path(cfg, "surface.csv")
        write_csv(out, "surface", ["kind", "i", "j", "re", "im"], rows)
        click.echo(f"wrote {out}")
    _run("surface-report", body)


@main.command("phase-report")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--sweep", default="-6,6,49", help="xi0,xi1,n saddle sweep")
def phase_report(config_path, sweep):
    """Dump phase constants, edge velocities, and a saddle sweep."""
    def body():
        cfg = load_config(config_path)
        ev = _build_background(cfg)
        pd = ev.pd
        rows = [("f0", 0, pd.f0), ("g0", 0, pd.g0)]
        for j in range(ev.spec.genus):
            rows.append(("Bf", j + 1, pd.bf[j]))
            rows.append(("Bg", j + 1, pd.bg[j]))
        for j in range(ev.spec.genus + 1):
            rows.append(("xi", j, pd.xi_lower[j]))
            rows.append(("xihat", j, pd.xi_upper[j]))
        x0, x1, nn = (float(v) for v in sweep.split(","))
        from .phase import saddle_point
        for xi in np.linspace(x0, x1, int(nn)):
            res = saddle_point(float(xi), pd)
            rows.append((f"z0_{res.case_tag}", 0, res.z0))
        out = _csv_path(cfg, "phase.csv")
        write_csv(out, "phase", ["kind", "index", "value"], rows)
        click.echo(f"wrote {out}")
    _run("phase-report", body)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--samples", default=40, help="number of spectral samples")
def scatter(config_path, samples):
    """Scattering matrix of the configured perturbation on a spectral grid."""
    def body():
        cfg = load_config(config_path)
        ev = _build_background(cfg)
        data = _perturbed(cfg, ev)
        from .scattering import reflections, scatter as scatter_op, spectral_grid
        grid = spectral_grid(ev.spec, cfg.grid_smax,
                             per_interval=max(2, samples // (ev.spec.genus + 2)),
                             edge_levels=4)
        rows = []
        for z in grid:
            S = scatter_op(float(z), data)
            r1, _, _, _ = reflections(S)
            rows.append((z, S[0, 0].real, S[0, 0].imag, S[0, 1].real,
                         S[0, 1].imag, S[1, 0].real, S[1, 0].imag,
                         S[1, 1].real, S[1, 1].imag, abs(r1)))
        out = _csv_path(cfg, "scatter.csv")
        write_csv(out, "scatter",
                  ["z", "re_s11", "im_s11", "re_s12", "im_s12",
                   "re_s21", "im_s21", "re_s22", "im_s22", "abs_r1"], rows)
        click.echo(f"wrote {out}")
    _run("scatter", body)


@main.command("delta-report")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--family", type=click.Choice(["I", "II", "III"]), default="III")
@click.option("--j0", type=int, default=0)
@click.option("--xi", type=float, default=6.0)
@click.option("--synthetic", default=None,
              help="use a synthetic profile (zero/gaussian/box/edge_matched) "
                   "instead of computed scattering data")
def delta_report(config_path, family, j0, xi, synthetic):
    """Band constants and limits of the region-dependent delta function."""
    def body():
        cfg = load_config(config_path)
        ev = _build_background(cfg)
        if synthetic is not None:
            from .scattering import synthetic_reflection
            kw = {"a": -6.0, "b": -3.0} if synthetic == "box" else {}
            sd = synthetic_reflection(ev.spec, synthetic, **kw)
        else:
            from .scattering import build_scattering_data
            sd = build_scattering_data(_perturbed(cfg, ev), smax=cfg.grid_smax,
                                       per_interval=cfg.grid_per_interval,
                                       edge_levels=cfg.grid_edge_levels)
        from .deltas import build_delta
        dd = build_delta(family, ev.spec, sd, pd=ev.pd, j0=j0, xi=xi)
        rows = [("delta_inf", 0, dd.delta_inf.real, dd.delta_inf.imag),
                ("delta_1", 0, dd.delta_1.real, dd.delta_1.imag)]
        for j in range(ev.spec.genus):
            rows.append(("delta_j", j + 1, dd.delta_j[j], 0.0))
        out = _csv_path(cfg, "delta.csv")
        write_csv(out, "delta", ["kind", "index", "re", "im"], rows)
        click.echo(f"wrote {out}")
    _run("delta-report", body)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--svg/--no-svg", default=False)
def p34(config_path, svg):
    """Tabulate the Painleve XXXIV transcendent u(s) and its integral a(s)."""
    def body():
        cfg = load_config(config_path)
        from .painleve34 import solve_p34
        table = solve_p34(cfg.p34_half_width, cfg.p34_nodes)
        rows = list(zip(table.s_grid, table.u, table.a))
        out = _csv_path(cfg, "p34.csv")
        body_txt = "\n".join(",".join(FMT % v for v in row) for row in rows)
        checksum = zlib.crc32(body_txt.encode())
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# schema=p34 version=1 checksum={checksum:08x}\n")
            fh.write("s,u,a\n")
            fh.write(body_txt + "\n")
        click.echo(f"wrote {out}")
        if svg:
            import matplotlib
            matplotlib.use("Agg")
            import matplotlib.pyplot as plt
            fig, ax = plt.subplots(figsize=(6, 4))
            ax.plot(table.s_grid, table.u, label="u(s)")
            ax.plot(table.s_grid, table.a, label="a(s)")
            ax.set_xlabel("s")
            ax.legend()
            ax.set_ylim(-2, 8)
            path = _csv_path(cfg, "p34.svg")
            _save_svg(fig, path)
            click.echo(f"wrote {path}")
    _run("p34", body)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--x", "x_opt", type=float, default=None)
@click.option("--t", "t_opt", type=float, required=True)
@click.option("--sweep", default=None, help="x0,x1,n sweep at fixed t")
@click.option("--compare-sim", type=click.Path(exists=True), default=None,
              help="simulate.csv to overlay in an SVG")
def asymptote(config_path, x_opt, t_opt, sweep, compare_sim):
    """Main-theorem approximation at (x, t) or along an x sweep."""
    def body():
        cfg = load_config(config_path)
        ev = _build_background(cfg)
        from .asymptotics import AsymptoticBundle, asymptote as asym_op
        from .painleve34 import solve_p34
        from .scattering import build_scattering_data, synthetic_reflection
        if cfg.perturbation_profile == "none":
            sd = synthetic_reflection(ev.spec, "zero")
        else:
            sd = build_scattering_data(_perturbed(cfg, ev), smax=cfg.grid_smax,
                                       per_interval=cfg.grid_per_interval,
                                       edge_levels=cfg.grid_edge_levels)
        table = solve_p34(cfg.p34_half_width, cfg.p34_nodes)
        bundle = AsymptoticBundle(ev, sd, table, cfg.transition_constant,
                                  cfg.t_min)
        if sweep is not None:
            x0, x1, nn = (float(v) for v in sweep.split(","))
            xs = np.linspace(x0, x1, int(nn))
        elif x_opt is not None:
            xs = np.array([x_opt])
        else:
            raise ConfigError("need --x or --sweep")
        rows = []
        for x in xs:
            res = asym_op(float(x), t_opt, bundle)
            rows.append((x, t_opt, res.region, res.leading.real,
                         res.leading.imag, res.correction.real,
                         res.correction.imag))
        out = _csv_path(cfg, "asymptote.csv")
        write_csv(out, "asymptote",
                  ["x", "t", "region", "re_leading", "im_leading",
                   "re_correction", "im_correction"], rows)
        click.echo(f"wrote {out}")
        if compare_sim is not None:
            import matplotlib
            matplotlib.use("Agg")
            import matplotlib.pyplot as plt
            sim = np.genfromtxt(compare_sim, delimiter=",", names=True,
                                skip_header=1)
            mask = np.abs(sim["t"] - t_opt) < 1e-9
            fig, ax = plt.subplots(figsize=(7, 4))
            ax.plot(sim["x"][mask],
                    np.hypot(sim["re_q"][mask], sim["im_q"][mask]),
                    label="simulation", lw=0.8)
            vals = [abs(complex(r[3], r[4]) + complex(r[5], r[6]))
                    for r in rows]
            ax.plot(xs, vals, "--", label="asymptotics")
            ax.set_xlabel("x")
            ax.set_ylabel("|q|")
            ax.legend()
            path = _csv_path(cfg, "asymptote.svg")
            _save_svg(fig, path)
            click.echo(f"wrote {path}")
    _run("asymptote", body)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--svg/--no-svg", default=False, help="waterfall of |q|")
def simulate(config_path, svg):
    """Split-step evolution of the configured perturbed initial data."""
    def body():
        cfg = load_config(config_path)
        ev = _build_background(cfg)
        from .nls_direct import SimulationConfig, evolve, make_initial
        sim_cfg = SimulationConfig(cfg.sim_half_width, cfg.sim_grid_points,
                                   cfg.sim_dt, cfg.sim_t_final,
                                   snapshot_times=tuple(cfg.sim_snapshot_times))
        data = _perturbed(cfg, ev)
        snap0 = make_initial(ev, sim_cfg, data.sampler)
        snaps = evolve(snap0, sim_cfg, ev)
        rows = []
        for snap in snaps:
            for x, q in zip(snap.x_grid, snap.q):
                rows.append((snap.t, x, q.real, q.imag))
        out = _csv_path(cfg, "simulate.csv")
        write_csv(out, "simulate", ["t", "x", "re_q", "im_q"], rows)
        click.echo(f"wrote {out}")
        if svg:
            import matplotlib
            matplotlib.use("Agg")
            import matplotlib.pyplot as plt
            fig, ax = plt.subplots(figsize=(7, 4))
            for i, snap in enumerate(snaps):
                ax.plot(snap.x_grid, np.abs(snap.q) + 0.25 * i, lw=0.7,
                        label=f"t = {snap.t:g}")
            ax.set_xlabel("x")
            ax.set_ylabel("|q| (offset)")
            ax.legend(fontsize=7)
            path = _csv_path(cfg, "simulate.svg")
            _save_svg(fig, path)
            click.echo(f"wrote {path}")
    _run("simulate", body)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--full/--quick", default=False,
              help="--full adds the scattering and decay experiments")
def validate(config_path, full):
    """Run the acceptance suite and print a pass/fail table."""
    def body():
        from .validation import ALL_CRITERIA, QUICK_CRITERIA, run_criteria
        numbers = tuple(sorted(ALL_CRITERIA)) if full else QUICK_CRITERIA
        results = run_criteria(numbers)
        failed = 0
        for num, name, ok, detail in results:
            tag = "PASS" if ok else "FAIL"
            click.echo(f"[{tag}] criterion {num:2d}: {name} -- {detail}")
            failed += 0 if ok else 1
        if failed:
            raise PipelineError("validate", FgnlsError(f"{failed} criteria failed"))
        click.echo("all criteria passed")
    _run("validate", body)


@main.command("emit-config")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def emit_config_cmd(config_path):
    """Print the effective configuration (round-trippable)."""
    def body():
        click.echo(emit_config(load_config(config_path)), nl=False)
    _run("emit-config", body)


if __name__ == "__main__":
    main()
