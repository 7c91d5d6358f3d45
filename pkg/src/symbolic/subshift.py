"""Symbolic factors at finite depth, factor maps and inverse-limit truncations"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Optional, Sequence

from loguru import logger

from src.errors import InconsistentTower, NotRefining, UnknownSymbol, WordTooLong
from src.partitions.names import Word, column_names
from src.partitions.partition import Partition
from src.rankone.spec import RankOneSpec
from src.sets.intervals import INFINITE, MeasureValue

Symbol = Hashable
WordKey = tuple[Symbol, ...]


def _all_ones(word: WordKey) -> bool:
    return all(s == 1 for s in word)


def _key(w) -> WordKey:
    return tuple(getattr(w, "symbols", w))


@dataclass(frozen=True)
class SubshiftModel:
    """Language of α-names up to length D with exact cylinder measures

    `measures` holds finite-measure words only; every all-1 word is
    admissible with infinite measure. `boundary` is the mass of fibers whose
    stage-column name ends with the word.
    """

    alphabet: tuple[Symbol, ...]
    max_length: int
    stage_depth: int
    words: dict[int, frozenset]
    measures: dict[WordKey, Fraction]
    boundary: dict[WordKey, Fraction] = field(default_factory=dict)

    def admissible(self, w) -> bool:
        key = _key(w)
        return key in self.words.get(len(key), frozenset())

    def word_measure(self, w) -> MeasureValue:
        key = _key(w)
        if len(key) > self.max_length:
            raise WordTooLong(f"Word of length {len(key)} exceeds depth {self.max_length}", length=len(key))
        if not key or _all_ones(key):
            return INFINITE
        return MeasureValue(self.measures.get(key, Fraction(0)))

    def language(self, length: int) -> list[WordKey]:
        return sorted(self.words.get(length, frozenset()), key=repr)


def build_subshift(spec: RankOneSpec, alpha: Partition, max_length: int, stage_depth: int) -> SubshiftModel:
    """μ̂([w]) = Σ over stage-column fibers of width × occurrences of w in the fiber name"""
    fibers = column_names(spec, alpha, stage_depth)
    words: dict[int, set] = {n: {(1,) * n} for n in range(1, max_length + 1)}
    measures: dict[WordKey, Fraction] = {}
    boundary: dict[WordKey, Fraction] = {}
    for piece, name in fibers:
        width = piece.measure()
        size = len(name)
        for n in range(1, min(max_length, size) + 1):
            bucket = words[n]
            for p in range(size - n + 1):
                w = name[p : p + n]
                bucket.add(w)
                if not _all_ones(w):
                    measures[w] = measures.get(w, Fraction(0)) + width
            tail = name[size - n :]
            if not _all_ones(tail):
                boundary[tail] = boundary.get(tail, Fraction(0)) + width
    model = SubshiftModel(
        alphabet=tuple(alpha.alphabet),
        max_length=max_length,
        stage_depth=stage_depth,
        words={n: frozenset(ws) for n, ws in words.items()},
        measures=measures,
        boundary=boundary,
    )
    logger.info(
        f"Built subshift model: {len(alpha.alphabet)} symbols, words up to {max_length}, "
        f"{sum(len(ws) for ws in words.values())} admissible words"
    )
    return model


def cylinder_measure(model: SubshiftModel, u, v) -> MeasureValue:
    """μ̂([u.v]) = μ̂([uv])"""
    return model.word_measure(_key(u) + _key(v))


@dataclass(frozen=True)
class AdditivityAudit:
    words_checked: int
    failures: tuple[WordKey, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def additivity_audit(model: SubshiftModel) -> AdditivityAudit:
    """μ̂([w]) = Σ_a μ̂([wa]) + boundary(w) for finite-measure w shorter than D"""
    failures = []
    checked = 0
    for n in range(1, model.max_length):
        for w in model.language(n):
            if _all_ones(w):
                continue
            checked += 1
            extensions = sum(model.measures.get(w + (a,), Fraction(0)) for a in model.alphabet)
            if model.measures.get(w, Fraction(0)) != extensions + model.boundary.get(w, Fraction(0)):
                failures.append(w)
    return AdditivityAudit(checked, tuple(failures))


def closure_audit(model: SubshiftModel) -> list[WordKey]:
    """Admissible words with an inadmissible subword"""
    bad = []
    for n in range(2, model.max_length + 1):
        for w in model.language(n):
            if not (model.admissible(w[1:]) and model.admissible(w[:-1])):
                bad.append(w)
    return bad


@dataclass(frozen=True)
class FactorMapTable:
    """φ_{β,α}: symbols of α to the symbol of the β-atom containing them"""

    mapping: dict[Symbol, Symbol]

    def __call__(self, symbol: Symbol) -> Symbol:
        if symbol not in self.mapping:
            raise UnknownSymbol(f"Symbol {symbol!r} is not in the factor domain", symbol=symbol)
        return self.mapping[symbol]


def factor_table(alpha: Partition, beta: Partition) -> FactorMapTable:
    """Table of φ_{β,α}, defined when every α atom lies inside one β atom"""
    if not beta.K.issubset(alpha.K):
        raise NotRefining("K_β is not inside K_α; atom 1 of α has no image")
    mapping: dict[Symbol, Symbol] = {1: 1}
    for i in range(2, alpha.size + 1):
        atom = alpha.atom(i)
        if not atom.intersects(beta.K):
            mapping[i] = 1
            continue
        target = next((j for j in range(2, beta.size + 1) if atom.issubset(beta.atom(j))), None)
        if target is None:
            raise NotRefining(f"Atom {i} of α meets several atoms of β", atom=i)
        mapping[i] = target
    return FactorMapTable(mapping)


def identity_table(alphabet: Sequence[Symbol]) -> FactorMapTable:
    return FactorMapTable({a: a for a in alphabet})


def factor_word(tbl: FactorMapTable, w):
    """Coordinatewise image; keeps the Word type and offset when given a Word"""
    image = tuple(tbl(s) for s in _key(w))
    return Word(image, w.offset) if isinstance(w, Word) else image


def compose(outer: FactorMapTable, inner: FactorMapTable) -> FactorMapTable:
    """outer ∘ inner"""
    return FactorMapTable({a: outer(b) for a, b in inner.mapping.items()})


@dataclass(frozen=True)
class InverseLimitTruncation:
    """Models of a refining chain, coarsest first; maps[i] = φ_{i, i+1}"""

    chain: tuple[Partition, ...]
    models: tuple[SubshiftModel, ...]
    maps: tuple[FactorMapTable, ...]

    def projection(self, n: int, m: int) -> FactorMapTable:
        """φ_{n,m} for m >= n from the stored connecting maps"""
        table = identity_table(self.models[m].alphabet)
        for k in range(m - 1, n - 1, -1):
            table = compose(self.maps[k], table)
        return table


def build_inverse_limit(
    spec: RankOneSpec, chain: Sequence[Partition], max_length: int, stage_depth: int
) -> InverseLimitTruncation:
    models = tuple(build_subshift(spec, alpha, max_length, stage_depth) for alpha in chain)
    maps = tuple(factor_table(chain[i + 1], chain[i]) for i in range(len(chain) - 1))
    return InverseLimitTruncation(tuple(chain), models, maps)


@dataclass(frozen=True)
class InverseLimitReport:
    levels: int
    compositions_checked: int
    words_projected: int
    pushforwards_checked: int


def inverse_limit_check(tr: InverseLimitTruncation) -> InverseLimitReport:
    """Composition law, projection consistency and exact pushforward of measures

    Raises InconsistentTower naming the failing (l, m, n).
    """
    levels = len(tr.models)
    if levels < 2:
        raise InconsistentTower("An inverse-limit check needs at least two levels", levels=levels)

    compositions = 0
    for l in range(levels):
        for n in range(l + 1, levels):
            direct = factor_table(tr.chain[n], tr.chain[l])
            for m in range(l, n + 1):
                composed = compose(tr.projection(l, m), tr.projection(m, n))
                compositions += 1
                if composed.mapping != direct.mapping:
                    raise InconsistentTower(f"φ_({l},{n}) differs from φ_({l},{m}) ∘ φ_({m},{n})", l=l, m=m, n=n)

    projected = pushed = 0
    for n in range(levels):
        for m in range(n + 1, levels):
            table = tr.projection(n, m)
            coarse, fine = tr.models[n], tr.models[m]
            for length in range(1, fine.max_length + 1):
                totals: dict[WordKey, Fraction] = {}
                for w in fine.language(length):
                    image = factor_word(table, w)
                    projected += 1
                    if not coarse.admissible(image):
                        raise InconsistentTower(f"Image of {w} is not admissible at level {n}", l=n, m=m, n=m)
                    if not _all_ones(image):
                        totals[image] = totals.get(image, Fraction(0)) + fine.measures.get(w, Fraction(0))
                for v in coarse.language(length):
                    if _all_ones(v):
                        continue
                    pushed += 1
                    if totals.get(v, Fraction(0)) != coarse.measures.get(v, Fraction(0)):
                        raise InconsistentTower(f"Pushforward of level {m} differs on {v}", l=n, m=m, n=m)
    logger.info(f"Inverse limit consistent over {levels} levels, {pushed} cylinder measures compared")
    return InverseLimitReport(levels, compositions, projected, pushed)
