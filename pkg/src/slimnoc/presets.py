"""Named network configurations for the N in {192, 200} and N = 1296 classes."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

from .layout import Layout, make_layout
from .topo import Topology, build_cmesh, build_fbf, build_pfbf, build_torus, slim_noc


class UnknownPreset(KeyError):
    pass


@dataclass(frozen=True)
class Preset:
    name: str
    build: Callable[[], Topology]
    layout: str | None = None  # None: the topology's natural grid
    vc: int = 2
    vc_scheme: str | None = None  # None: default for the topology kind
    size_class: str = "S"

    def topology(self) -> Topology:
        return _cached(self.name)

    def make_layout(self, seed: int = 0) -> Layout:
        return make_layout(self.topology(), self.layout, seed)


def _grid(kind, rows, cols, p):
    build = {"t2d": build_torus, "cm": build_cmesh, "fbf": build_fbf}[kind]
    return lambda: build(rows, cols, p)


_P: dict[str, Preset] = {}


def _add(pr: Preset):
    _P[pr.name] = pr


# router grids are given as cols x rows
for _name, _p, _cols, _rows, _cls in [("3", 3, 8, 8, "S"), ("4", 4, 10, 5, "S"),
                                       ("9", 9, 12, 12, "L"), ("8", 8, 18, 9, "L")]:
    for _kind in ("t2d", "cm", "fbf"):
        _add(Preset(f"{_kind}{_name}", _grid(_kind, _rows, _cols, _p),
                    vc=2, size_class=_cls))

# partitioned FBFs: hop-indexed VCs over up to four hops
_add(Preset("pfbf3", lambda: build_pfbf(2, 2, 4, 4, 3), vc=4, vc_scheme="hop"))
_add(Preset("pfbf4", lambda: build_pfbf(2, 1, 5, 5, 4), vc=4, vc_scheme="hop"))
_add(Preset("pfbf9", lambda: build_pfbf(2, 2, 6, 6, 9), vc=4, vc_scheme="hop", size_class="L"))
_add(Preset("pfbf8", lambda: build_pfbf(2, 1, 9, 9, 8), vc=4, vc_scheme="hop", size_class="L"))

for _lay in ("basic", "subgr", "gr", "rand"):
    _add(Preset(f"sn_{_lay}", lambda: slim_noc(5, 4, "sn_s"), layout=_lay))
    _add(Preset(f"snl_{_lay}", lambda: slim_noc(9, 8, "sn_l"), layout=_lay, size_class="L"))


@lru_cache(maxsize=None)
def _cached(name: str) -> Topology:
    t = _P[name].build()
    return t


PRESETS = dict(_P)


def get(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; known: {', '.join(sorted(PRESETS))}") from None
