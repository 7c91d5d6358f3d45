"""Command runner: one method per CLI subcommand, each returning a JSON-ready result"""

from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Optional

from loguru import logger

from src import TOOL_NAME, __version__
from src.errors import BudgetExhausted, MalformedInput
from src.experiments import io
from src.models.enums import CommandName, DonorPolicy, UniformizeMode
from src.models.schemas import (
    ColumnSummary,
    CriteriaResultSchema,
    ExperimentConfig,
    OrbitVerdictSchema,
    RatioRowSchema,
    Report,
    ReportMeta,
    StepLogSchema,
    TowerSummary,
    UniformityVerdictSchema,
    UniformizeSummary,
)
from src.partitions.partition import Partition
from src.rankone.spec import RankOneSpec, list_presets
from src.sets.intervals import IntervalSet
from src.stats.birkhoff import hopf_ratio_scan, sample_points, uniformity_test
from src.stats.radon import (
    CylinderSet,
    HitCounter,
    bounded_orbit_detect,
    orbit_walks,
    prop32_check,
    radon_estimate,
)
from src.symbolic.bratteli import DiagramRenderer, audit_path_counts, export_bratteli
from src.symbolic.subshift import additivity_audit, build_subshift, closure_audit
from src.towers.surgery import (
    build_K_standard,
    canonical_tower_sequence,
    is_K_standard,
    refine_K_standard,
    refines,
)
from src.towers.tower import StandardTower
from src.uniformizer.steps import uniformize


def summarize_tower(t: StandardTower, K: IntervalSet) -> TowerSummary:
    report = is_K_standard(t, K)
    return TowerSummary(
        columns=[
            ColumnSummary(
                index=i,
                height=c.height,
                base_measure=c.base_measure,
                k_levels=sum(1 for s in c.level_sets if s.issubset(K)),
            )
            for i, c in enumerate(t.columns)
        ],
        heights=sorted(set(t.heights)),
        principal_mass=t.principal_mass,
        unresolved_mass=t.unresolved.measure(),
        k_standard=report.ok,
        straddling=[list(p) for p in report.straddling],
        columns_without_K=list(report.columns_without_K),
    )


class ExperimentRunner:
    """Runs one configured experiment and writes its artifacts under `out_dir`"""

    def __init__(self, spec: RankOneSpec, config: ExperimentConfig):
        self.spec = spec
        self.config = config
        self.out_dir = Path(config.out_dir)
        self.depth = config.depth
        self.params = config.params
        self.step_logs: list = []
        self._handlers: dict[CommandName, Callable[[], dict]] = {
            CommandName.BUILD_TOWER: self.build_tower,
            CommandName.REFINE_TOWER: self.refine_tower,
            CommandName.UNIFORMITY: self.uniformity,
            CommandName.UNIFORMIZE: self.uniformize,
            CommandName.SUBSHIFT: self.subshift,
            CommandName.RADON_CHECK: self.radon_check,
            CommandName.EXPORT_BRATTELI: self.export_bratteli,
            CommandName.STATS: self.stats,
            CommandName.PRESETS: self.presets,
        }

    # Parameter access
    def _get(self, name: str, default: Any = None) -> Any:
        value = self.params.get(name, default)
        if value is None:
            raise MalformedInput(f"--{name.replace('_', '-')} is required for {self.config.command.value}")
        return value

    def _interval(self, name: str, default: Optional[str] = None) -> IntervalSet:
        return io.parse_interval_set(self._get(name, default))

    def _rational(self, name: str, default: Optional[str] = None) -> Fraction:
        return io.parse_rational(str(self._get(name, default)))

    def _samples(self, K: IntervalSet) -> list[Fraction]:
        count = self.params.get("samples")
        return sample_points(K, None if count is None else int(count))

    # Entry point
    def run(self) -> Report:
        command = self.config.command
        logger.info(f"Running {command.value} on {self.spec.name} at depth {self.depth}")
        result = self._handlers[command]()
        report = Report(
            meta=ReportMeta(
                tool=TOOL_NAME,
                version=__version__,
                command=command,
                config_hash=self.config.config_hash(),
            ),
            result=io.to_plain(result),
        )
        io.write_json(self.out_dir / f"{command.value}.json", report.model_dump(mode="json"))
        return report

    # Commands
    def presets(self) -> dict:
        return {"presets": list_presets()}

    def build_tower(self) -> dict:
        K = self._interval("K")
        N = int(self._get("N"))
        tower = build_K_standard(self.spec, K, N, self.depth)
        return {
            "summary": summarize_tower(tower, K).model_dump(mode="json"),
            "tower": tower.to_json(),
        }

    def refine_tower(self) -> dict:
        K = self._interval("K")
        N = int(self._get("N"))
        n = int(self._get("n"))
        t1 = build_K_standard(self.spec, K, N, self.depth)
        t2 = refine_K_standard(self.spec, t1, K, n, self.depth)
        check = refines(t2, t1)
        return {
            "coarse": summarize_tower(t1, K).model_dump(mode="json"),
            "refined": summarize_tower(t2, K).model_dump(mode="json"),
            "refines": {
                "ok": check.ok,
                "base_inclusion": check.base_inclusion,
                "offending_levels": [list(p) for p in check.offending_levels],
            },
            "height_window": [n, n + 4 * t1.max_height],
        }

    def uniformity(self) -> dict:
        C, K = self._interval("C"), self._interval("K")
        schedule = self.params.get("m_schedule")
        verdict = uniformity_test(
            self.spec,
            C,
            K,
            self._rational("eps"),
            io.parse_int_list(schedule) if schedule else None,
            self._samples(K),
            self.depth,
        )
        return {
            "verdict": UniformityVerdictSchema.model_validate(verdict).model_dump(mode="json"),
            "uniform": verdict.uniform,
        }

    def stats(self) -> dict:
        C, K = self._interval("C"), self._interval("K")
        horizons = self.params.get("horizons")
        report = hopf_ratio_scan(
            self.spec,
            C,
            K,
            self._samples(K),
            io.parse_int_list(horizons) if horizons else None,
            self.depth,
        )
        rows = [RatioRowSchema.model_validate(r).model_dump(mode="json") for r in report.rows]
        io.write_csv(
            self.out_dir / "stats.csv",
            ["point", "N", "hit_count", "ratio_num", "ratio_den", "deviation"],
            (
                {
                    "point": r.point,
                    "N": r.horizon,
                    "hit_count": r.hit_count,
                    "ratio_num": r.c_count,
                    "ratio_den": r.hit_count,
                    "deviation": "" if r.deviation is None else r.deviation,
                }
                for r in report.rows
            ),
        )
        io.write_plot_data(self.out_dir / "stats.plot.dat", report.max_deviation.items())
        tolerance = self.params.get("eps", "1/20")
        return {
            "target": report.target,
            "horizons": list(report.horizons),
            "max_deviation": report.max_deviation,
            "final_rows": [RatioRowSchema.model_validate(r).model_dump(mode="json") for r in report.final_rows()],
            "fraction_within": report.fraction_within(io.parse_rational(tolerance)),
            "tolerance": tolerance,
            "unresolved": [list(p) for p in report.unresolved],
            "rows": rows,
        }

    def uniformize(self) -> dict:
        alpha0 = io.parse_partition(self._get("alpha"))
        mode = UniformizeMode(self.params.get("mode", UniformizeMode.INITIAL.value))
        beta = io.parse_partition(self.params["beta"]) if self.params.get("beta") else None
        epsilon = self._rational("eps")
        try:
            result = uniformize(
                self.spec,
                alpha0,
                epsilon,
                int(self._get("steps", 1)),
                mode,
                beta,
                self.depth,
                audit_n_max=int(self.params.get("audit_n_max", 1)),
                donor_policy=DonorPolicy(self.params.get("donor_policy", DonorPolicy.LARGEST.value)),
            )
        except BudgetExhausted as e:
            self.step_logs = e.logs
            raise
        self.step_logs = result.logs
        io.write_jsonl(self.out_dir / "steps.jsonl", (log.to_json() for log in result.logs))
        io.write_json(self.out_dir / "partition.json", result.partition.to_json())
        summary = UniformizeSummary(
            mode=mode,
            epsilon=epsilon,
            steps=[StepLogSchema.model_validate(log) for log in result.logs],
            ledger=result.ledger,
            total_distance=result.total_distance,
            hit_growth=result.hit_growth,
            depth=result.depth,
            uniform_atoms=sum(1 for v in result.uniformity.values() if v.uniform),
            non_uniform_atoms=[str(k) for k, v in result.uniformity.items() if not v.uniform],
        )
        return {"summary": summary.model_dump(mode="json"), "partition": result.partition.to_json()}

    def _model_inputs(self) -> tuple[Partition, int]:
        return io.parse_partition(self._get("alpha")), int(self._get("length", 6))

    def subshift(self) -> dict:
        alpha, length = self._model_inputs()
        model = build_subshift(self.spec, alpha, length, self.depth)
        audit = additivity_audit(model)
        measures = {}
        for cyl in io.parse_cylinders(self.params.get("cylinders") or ""):
            measures[str(cyl)] = str(model.word_measure(cyl.word))
        return {
            "alphabet": list(model.alphabet),
            "language_sizes": {str(n): len(ws) for n, ws in sorted(model.words.items())},
            "cylinder_measures": measures,
            "additivity": {"ok": audit.ok, "words_checked": audit.words_checked, "failures": list(audit.failures)},
            "closure_failures": closure_audit(model),
        }

    def radon_check(self) -> dict:
        alpha, length = self._model_inputs()
        model = build_subshift(self.spec, alpha, length, self.depth)
        K = CylinderSet.anchors(model.alphabet)
        A_list = io.parse_cylinders(self._get("A"))
        walks = orbit_walks(self.spec, alpha, self._samples(alpha.K), self.depth)
        criteria = prop32_check(model, K, A_list, walks, self._rational("eps", "1/20"))
        orbits = [bounded_orbit_detect(w, K) for w in walks]
        estimates = {}
        for A in A_list:
            finals = []
            for w in walks:
                L = min(HitCounter(w, A).max_horizon(), HitCounter(w, K).max_horizon())
                finals.append(radon_estimate(w, A, K, [L])[0] if L else None)
            estimates[str(A)] = finals
        return {
            "criteria": [CriteriaResultSchema.model_validate(r).model_dump(mode="json") for r in criteria.results],
            "consistent": criteria.consistent,
            "orbits": [OrbitVerdictSchema.model_validate(v).model_dump(mode="json") for v in orbits],
            "estimates": estimates,
        }

    def export_bratteli(self) -> dict:
        K = self._interval("K")
        levels = io.parse_int_list(self._get("levels", ",".join(str(d) for d in range(1, self.depth + 1))))
        diagram = export_bratteli(canonical_tower_sequence(self.spec, K, levels))
        (self.out_dir).mkdir(parents=True, exist_ok=True)
        (self.out_dir / "bratteli.dot").write_text(DiagramRenderer().render(diagram, "dot"), encoding="utf-8")
        audit = audit_path_counts(diagram)
        return {
            "diagram": diagram.to_json(),
            "path_counts": {v: diagram.path_counts[v] for v in sorted(diagram.base_measures)},
            "audit": {"ok": audit.ok, "vertices_checked": audit.vertices_checked, "failures": list(audit.failures)},
        }
