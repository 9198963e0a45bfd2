from __future__ import annotations

from dataclasses import asdict, dataclass


class ResourceExceeded(RuntimeError):
    """A computation needed more than its configured budget allows."""

    def __init__(self, what: str, limit: int, needed: int | None = None):
        self.what = what
        self.limit = limit
        self.needed = needed
        msg = f"{what}: budget {limit} exceeded"
        if needed is not None:
            msg += f" (needs {needed})"
        super().__init__(msg)


@dataclass(frozen=True)
class Budget:
    max_algebra_size: int = 4000
    max_candidates: int = 250_000
    max_congruences: int = 5000
    max_fresh_vars: int = 2
    isl_kripke_bound: int = 6
    nis_model_bound: int = 5
    max_model_rows: int = 3_000_000
    lowenheim_rounds: int = 3

    def __post_init__(self):
        for name, value in asdict(self).items():
            if value <= 0:
                raise ValueError(f"budget {name} must be positive, got {value}")

    def check(self, what: str, limit_name: str, needed: int) -> None:
        limit = getattr(self, limit_name)
        if needed > limit:
            raise ResourceExceeded(what, limit, needed)

    def as_dict(self) -> dict[str, int]:
        return asdict(self)


DEFAULT_BUDGET = Budget()
