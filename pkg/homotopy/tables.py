"""Versioned homotopy tables: abelian group models and Whitehead product rules.

Tables are YAML files in ``homotopy/tables``. Each integral table describes,
for one n, the groups pi_{2n-1}(S^n) ("middle"), pi_{3n-2}(S^{2n-1}) ("stem")
and pi_{3n-2}(S^n) ("top") together with the rules the normalizer needs:
Hopf invariants, suspensions, compositions, [gamma, iota] brackets and the
value of [[iota, iota], iota]. The generic table only lists the facts the
large-k ledger cites.
"""
import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple, Union

import yaml

from core.config import config_manager
from core.exceptions import TableError
from core.interfaces import ITableSource

logger = logging.getLogger(__name__)

TABLE_FORMAT = "sphere-table/1"
TABLE_NAMES = ("n2", "n4", "n8", "generic")

TABLE_CHECKSUMS: Dict[str, str] = {
    "n2": "c43fb8006d8023ff92219c40a9b5eafbba0a279a68db6f40e4943bb75c668422",
    "n4": "09e32916950f5b26787b7e9b60ed88269cb0de55bd61f483890303e1047a100d",
    "n8": "dd13b77ec20a06cd711fc5104646d637ed75cedf190d29f3991ce1782fdf7cb9",
    "generic": "48d32c7678667b0ca34a5f4719a22caad02cf16f3c642c190ef5994f0fa11ce3",
}

Coords = Tuple[int, ...]


@dataclass(frozen=True)
class AbGroup:
    """Finitely generated abelian group; factor 0 is an infinite cyclic summand."""
    factors: Tuple[int, ...]
    names: Tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.factors) != len(self.names):
            raise TableError("generator names must match invariant factors")
        if len(set(self.names)) != len(self.names):
            raise TableError(f"duplicate generator names {self.names}")
        if any(f < 0 for f in self.factors):
            raise TableError("invariant factors must be nonnegative")

    def __len__(self) -> int:
        return len(self.factors)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError as e:
            raise TableError(f"unknown generator {name!r}; known: {list(self.names)}") from e

    def order(self, name: str) -> int:
        return self.factors[self.index(name)]

    def reduce(self, coords: Coords) -> Coords:
        return tuple(c % f if f else c for c, f in zip(coords, self.factors))

    def coords(self, mapping: Mapping[str, int]) -> Coords:
        out = [0] * len(self)
        for name, value in (mapping or {}).items():
            out[self.index(name)] += int(value)
        return self.reduce(tuple(out))

    def is_zero(self, coords: Coords) -> bool:
        return not any(self.reduce(coords))

    def render(self, coords: Coords) -> str:
        parts = [f"{c}{n}" if c != 1 else n for c, n in zip(self.reduce(coords), self.names) if c]
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True, eq=False)
class SphereTable:
    """Integral table for one n, with one sign variant selected."""
    name: str
    n: int
    variant: Optional[str]
    middle: AbGroup
    hopf: Mapping[str, int]
    suspension: Mapping[str, Coords]
    whitehead_square: Coords
    stem: AbGroup
    classes: Mapping[str, Coords]
    top: AbGroup
    compositions: Mapping[str, Mapping[str, Coords]]
    brackets: Mapping[str, Coords]
    triple: Coords
    classifying_modulus: Optional[int] = None
    classifying_images: Mapping[str, int] = field(default_factory=dict)
    sources: Mapping[str, str] = field(default_factory=dict)
    variants: Tuple[str, ...] = ()
    checksum: str = ""

    @property
    def key(self) -> Tuple[str, Optional[str]]:
        return self.name, self.variant

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SphereTable):
            return NotImplemented
        return self.key == other.key and self.checksum == other.checksum

    def __hash__(self) -> int:
        return hash((self.key, self.checksum))

    @property
    def middle_degree(self) -> int:
        return 2 * self.n - 1

    @property
    def top_degree(self) -> int:
        return 3 * self.n - 2

    @property
    def hopf_class(self) -> str:
        """The Hopf-invariant-one generator of pi_{2n-1}(S^n)."""
        for name in self.middle.names:
            if self.hopf[name] == 1 and self.middle.order(name) == 0:
                return name
        raise TableError(f"table {self.name} has no Hopf invariant one class")

    @property
    def torsion_class(self) -> Optional[str]:
        return next((n for n, f in zip(self.middle.names, self.middle.factors) if f), None)

    def class_coords(self, name: str) -> Coords:
        if name not in self.classes:
            raise TableError(f"unknown composition class {name!r}")
        return self.classes[name]

    def compose(self, generator: str, theta: Coords) -> Coords:
        """generator ∘ theta in the top group, theta given in stem coordinates."""
        out = [0] * len(self.top)
        rules = self.compositions[generator]
        for stem_name, t in zip(self.stem.names, theta):
            if t:
                for i, c in enumerate(rules[stem_name]):
                    out[i] += t * c
        return self.top.reduce(tuple(out))

    def validate(self) -> None:
        """Closure and consistency checks of the rule set."""
        for gen in self.middle.names:
            if gen not in self.hopf or gen not in self.suspension:
                raise TableError(f"{self.name}: generator {gen} lacks Hopf invariant or suspension")
            if gen not in self.brackets:
                raise TableError(f"{self.name}: no [{gen}, iota] rule")
            missing = [s for s in self.stem.names if s not in self.compositions.get(gen, {})]
            if missing:
                raise TableError(f"{self.name}: no composition rule for {gen} with {missing}")

        susp = [0] * len(self.stem)
        hopf = 0
        triple = [0] * len(self.top)
        for c, gen in zip(self.whitehead_square, self.middle.names):
            hopf += c * self.hopf[gen]
            for i, s in enumerate(self.suspension[gen]):
                susp[i] += c * s
            for i, t in enumerate(self.brackets[gen]):
                triple[i] += c * t
        if not self.stem.is_zero(tuple(susp)):
            raise TableError(f"{self.name}: suspension of [iota, iota] is not zero")
        if hopf != 2:
            raise TableError(f"{self.name}: Hopf invariant of [iota, iota] is {hopf}, expected 2")
        if self.top.reduce(tuple(triple)) != self.top.reduce(self.triple):
            raise TableError(
                f"{self.name}: [[iota,iota],iota] = {self.top.render(self.triple)} disagrees with "
                f"the bracket rules ({self.top.render(tuple(triple))})"
            )
        for gen in self.middle.names:
            expected = self.folded_bracket(gen)
            if self.top.reduce(self.brackets[gen]) != expected:
                raise TableError(
                    f"{self.name}: [{gen}, iota] = {self.top.render(self.brackets[gen])} does not match "
                    f"[iota,iota] ∘ E({gen}) - H({gen}) [[iota,iota],iota] = {self.top.render(expected)}"
                )

    def folded_bracket(self, gen: str) -> Coords:
        """Image of [alpha_1, gen_2] under the fold map of S^n v S^n, from the mixed bracket rule."""
        out = [0] * len(self.top)
        for c, square_gen in zip(self.whitehead_square, self.middle.names):
            for i, t in enumerate(self.compose(square_gen, self.suspension[gen])):
                out[i] += c * t
        h = self.hopf[gen]
        for i, t in enumerate(self.triple):
            out[i] -= h * t
        return self.top.reduce(tuple(out))


@dataclass(frozen=True)
class GenericFacts:
    """Facts cited by the ledger of the generic regime."""
    name: str
    facts: Mapping[str, Tuple[str, str]]
    checksum: str = ""

    def statement(self, key: str) -> str:
        return self.facts[key][0]

    def source(self, key: str) -> str:
        return self.facts[key][1]


LoadedTable = Union[SphereTable, GenericFacts]


def file_checksum(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _add(base: Coords, extra: Coords) -> Coords:
    return tuple(a + b for a, b in zip(base, extra))


class TableLoader(ITableSource):
    """Loads and checks tables from a directory."""

    def __init__(self, table_dir: Optional[Path] = None, verify_checksums: Optional[bool] = None):
        config = config_manager.config.tables
        self.table_dir = Path(table_dir) if table_dir is not None else config.table_dir
        self.verify_checksums = config.verify_checksums if verify_checksums is None else verify_checksums
        self._cache: Dict[Tuple[str, Optional[str]], LoadedTable] = {}

    def path(self, name: str) -> Path:
        return self.table_dir / f"{name}.yaml"

    def exists(self, name: str) -> bool:
        return self.path(name).is_file()

    def check(self, name: str) -> str:
        """Verify the pinned checksum of one table file; returns the digest."""
        path = self.path(name)
        if not path.is_file():
            raise TableError(f"table {name} not found at {path}")
        digest = file_checksum(path)
        expected = TABLE_CHECKSUMS.get(name)
        if self.verify_checksums and expected is not None and digest != expected:
            raise TableError(f"checksum mismatch for table {name}: {digest} != {expected}")
        return digest

    def variants(self, name: str) -> Tuple[str, ...]:
        raw = self._read(name)
        return tuple((raw.get("variants") or {}).keys())

    def _read(self, name: str) -> dict:
        path = self.path(name)
        if not path.is_file():
            raise TableError(f"table {name} not found at {path}")
        try:
            raw = yaml.safe_load(path.read_text())
        except yaml.YAMLError as e:
            raise TableError(f"table {name} is not valid YAML: {e}") from e
        if not isinstance(raw, dict) or raw.get("format") != TABLE_FORMAT:
            raise TableError(f"table {name} does not declare format {TABLE_FORMAT}")
        return raw

    def load(self, name: str, variant: Optional[str] = None) -> LoadedTable:
        """Load a table by name; tables with sign variants default to the first listed."""
        cache_key = (name, variant)
        if cache_key in self._cache:
            return self._cache[cache_key]
        digest = self.check(name)
        raw = self._read(name)
        if raw.get("regime") == "generic":
            facts = {
                key: (str(entry["statement"]), str(entry.get("source", "")))
                for key, entry in (raw.get("facts") or {}).items()
            }
            table: LoadedTable = GenericFacts(name=name, facts=facts, checksum=digest)
        else:
            table = self._build(name, raw, variant, digest)
            table.validate()
        self._cache[cache_key] = table
        logger.debug("loaded table %s (variant %s)", name, variant)
        return table

    def _build(self, name: str, raw: dict, variant: Optional[str], digest: str) -> SphereTable:
        try:
            middle_raw = raw["middle"]
            middle = AbGroup(
                tuple(int(g["order"]) for g in middle_raw["generators"]),
                tuple(str(g["name"]) for g in middle_raw["generators"]),
            )
            stem = AbGroup(
                tuple(int(g["order"]) for g in raw["stem"]["generators"]),
                tuple(str(g["name"]) for g in raw["stem"]["generators"]),
            )
            top = AbGroup(
                tuple(int(g["order"]) for g in raw["top"]["generators"]),
                tuple(str(g["name"]) for g in raw["top"]["generators"]),
            )
            hopf = {str(g["name"]): int(g["hopf"]) for g in middle_raw["generators"]}
            suspension = {
                str(g["name"]): stem.coords(g.get("suspension") or {}) for g in middle_raw["generators"]
            }
            classes = {str(k): stem.coords(v) for k, v in raw["stem"].get("classes", {}).items()}
            compositions = {
                str(gen): {str(s): top.coords(img) for s, img in rules.items()}
                for gen, rules in raw["compositions"].items()
            }
            brackets = {str(gen): top.coords(img) for gen, img in raw["brackets"]["rules"].items()}
            triple = top.coords(raw.get("triple") or {})
            variants = tuple((raw.get("variants") or {}).keys())
            if variants:
                chosen = variant or variants[0]
                if chosen not in variants:
                    raise TableError(f"table {name} has no variant {chosen!r}; known: {list(variants)}")
                overlay = raw["variants"][chosen]
                for gen, extra in (overlay.get("rules") or {}).items():
                    brackets[str(gen)] = top.reduce(_add(brackets[str(gen)], top.coords(extra)))
                triple = top.reduce(_add(triple, top.coords(overlay.get("triple") or {})))
                variant = chosen
            elif variant is not None:
                raise TableError(f"table {name} has no sign variants")
            classifying = raw.get("classifying") or {}
            sources = {
                section: str(raw[section].get("source", ""))
                for section in ("middle", "stem", "top", "brackets")
                if isinstance(raw.get(section), dict)
            }
            return SphereTable(
                name=name,
                n=int(raw["n"]),
                variant=variant,
                middle=middle,
                hopf=hopf,
                suspension=suspension,
                whitehead_square=middle.coords(middle_raw["whitehead_square"]),
                stem=stem,
                classes=classes,
                top=top,
                compositions=compositions,
                brackets=brackets,
                triple=triple,
                classifying_modulus=classifying.get("modulus"),
                classifying_images={str(k): int(v) for k, v in (classifying.get("middle") or {}).items()},
                sources=sources,
                variants=variants,
                checksum=digest,
            )
        except (KeyError, TypeError, ValueError) as e:
            raise TableError(f"table {name} is malformed: {e}") from e


_default_loader: Optional[TableLoader] = None


def default_loader() -> TableLoader:
    global _default_loader
    if _default_loader is None or _default_loader.table_dir != config_manager.config.tables.table_dir:
        _default_loader = TableLoader()
    return _default_loader


def load_table(name: str, variant: Optional[str] = None) -> LoadedTable:
    return default_loader().load(name, variant)


def integral_table(n: int, variant: Optional[str] = None) -> SphereTable:
    """The integral table for n in {2, 4, 8}."""
    if n not in (2, 4, 8):
        raise TableError(f"no integral table for n={n}")
    table = load_table(f"n{n}", variant)
    assert isinstance(table, SphereTable)
    return table


def generic_facts() -> GenericFacts:
    table = load_table("generic")
    assert isinstance(table, GenericFacts)
    return table


def table_names() -> List[str]:
    return list(TABLE_NAMES)
