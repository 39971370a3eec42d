"""Deterministic synthetic corpus generation and on-disk layout.

A corpus is ``<root>/<group_id>/<idx>.c`` plus ``manifest.json``. Classify
corpora draw each class from one structural template family; clone corpora
render every problem through two or three structurally distinct
sub-templates (loop style, recursion, pointer walks), so same-problem pairs
include syntactically dissimilar implementations of one computation.

Surface variation is controlled by five knobs: identifier renaming, loop
rendering swaps (direction, braces, increment spelling), integer constant
jitter, shuffling of independent declarations, and dead-code insertion.
(seed, spec) fully determine every byte on disk.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .frontend import parse_source, validate_ast
from .training import _seeded_rng, make_splits

GENERATOR_VERSION = "1"
MANIFEST_FORMAT = "mtn-corpus/1"


class GenerationExhausted(Exception):
    def __init__(self, template: str, seed: int):
        super().__init__(
            f"template {template!r} produced no parseable file in 100 tries "
            f"(seed {seed})")
        self.template = template
        self.seed = seed


@dataclass(frozen=True)
class CorpusSpec:
    task: str  # "classify" | "clone"
    n_classes: Optional[int] = None
    n_problems: Optional[int] = None
    per_class: int = 100
    seed: int = 0
    rename_prob: float = 0.9
    loop_swap_prob: float = 0.5
    const_jitter: int = 10
    shuffle_prob: float = 0.3
    dead_code_prob: float = 0.2

    def __post_init__(self):
        if self.task not in ("classify", "clone"):
            raise ValueError(f"unknown task {self.task!r}")
        if self.task == "classify":
            if self.n_classes is None:
                raise ValueError("classify corpora need n_classes")
            if not 2 <= self.n_classes <= len(CLASSIFY_TEMPLATES):
                raise ValueError(
                    f"n_classes must be in 2..{len(CLASSIFY_TEMPLATES)}")
        else:
            if self.n_problems is None:
                raise ValueError("clone corpora need n_problems")
            if not 2 <= self.n_problems <= len(CLONE_PROBLEMS):
                raise ValueError(
                    f"n_problems must be in 2..{len(CLONE_PROBLEMS)}")
        if self.per_class < 2:
            raise ValueError("per_class must be >= 2")
        for knob in ("rename_prob", "loop_swap_prob", "shuffle_prob",
                     "dead_code_prob"):
            if not 0.0 <= getattr(self, knob) <= 1.0:
                raise ValueError(f"{knob} must be in [0, 1]")
        if self.const_jitter < 0:
            raise ValueError("const_jitter must be >= 0")

    @property
    def n_groups(self) -> int:
        return self.n_classes if self.task == "classify" else self.n_problems


_NAME_POOL = [
    "i", "j", "k", "n", "m", "s", "t", "a", "b", "c", "x", "y", "z",
    "acc", "cnt", "val", "tmp", "lo", "hi", "idx", "num", "total", "res",
    "aux", "pos", "buf", "w", "u", "v", "p", "q", "len1", "sum1", "best",
    "step", "cur", "next1", "left", "right", "mid",
]


class _Render:
    """Per-file rendering context carrying the RNG and variation knobs."""

    def __init__(self, rng: np.random.Generator, spec: CorpusSpec):
        self.rng = rng
        self.spec = spec
        self.used: set[str] = set()

    def flip(self, p: float) -> bool:
        return bool(self.rng.random() < p)

    def fresh(self) -> str:
        while True:
            name = _NAME_POOL[int(self.rng.integers(0, len(_NAME_POOL)))]
            if name not in self.used:
                self.used.add(name)
                return name
            if len(self.used) >= len(_NAME_POOL):
                name = f"v{int(self.rng.integers(0, 10000))}"
                if name not in self.used:
                    self.used.add(name)
                    return name

    def names(self, *canonical: str) -> list[str]:
        out = []
        for canon in canonical:
            if self.flip(self.spec.rename_prob) or canon in self.used:
                out.append(self.fresh())
            else:
                self.used.add(canon)
                out.append(canon)
        return out

    def jit(self, base: int, lo: int = 1) -> int:
        j = self.spec.const_jitter
        if j == 0:
            return base
        return max(lo, base + int(self.rng.integers(-j, j + 1)))

    def incr(self, var: str, step: str = "1") -> str:
        if self.flip(self.spec.loop_swap_prob):
            return f"{var} += {step};"
        return f"{var} = {var} + {step};"

    def decr(self, var: str, step: str = "1") -> str:
        if self.flip(self.spec.loop_swap_prob):
            return f"{var} -= {step};"
        return f"{var} = {var} - {step};"

    def decl_block(self, lines: list[str]) -> list[str]:
        """Dead-code insertion plus optional shuffling of independent decls."""
        lines = list(lines)
        if self.flip(self.spec.dead_code_prob):
            lines.append(f"int {self.fresh()} = {self.jit(7)};")
        if self.flip(self.spec.dead_code_prob):
            lines.append(f"int {self.fresh()} = {self.jit(3)};")
        if len(lines) > 1 and self.flip(self.spec.shuffle_prob):
            order = self.rng.permutation(len(lines))
            lines = [lines[int(i)] for i in order]
        return lines

    def block(self, body: list[str], indent: str = "    ") -> list[str]:
        """Wrap statements in braces, or leave a single statement bare."""
        if len(body) == 1 and self.flip(self.spec.loop_swap_prob):
            return [body[0]]
        return ["{"] + [indent + line for line in body] + ["}"]


def _fn(name: str, params: str, decls: list[str], body: list[str],
        ret: str) -> str:
    lines = [f"int {name}({params}) {{"]
    for line in decls + body:
        lines.append("    " + line)
    lines.append(f"    return {ret};")
    lines.append("}")
    return "\n".join(lines)


def _for_loop(r: _Render, var: str, start: str, bound: str,
              body: list[str]) -> list[str]:
    blk = r.block(body)
    head = f"for ({var} = {start}; {var} < {bound}; {r.incr(var)[:-1]}) "
    return [head + blk[0]] + blk[1:]


def _count_loop(r: _Render, var: str, n: str, body: list[str],
                style: str) -> list[str]:
    """A 1..n loop in the requested style; body must not touch ``var``."""
    if style == "for":
        blk = r.block(body)
        head = f"for ({var} = 1; {var} <= {n}; {r.incr(var)[:-1]}) "
        return [head + blk[0]] + blk[1:]
    inner = body + [r.incr(var)]
    if style == "while":
        blk = r.block(inner)
        return [f"{var} = 1;", f"while ({var} <= {n}) " + blk[0]] + blk[1:]
    if style == "dowhile":
        lines = [f"{var} = 1;", "do {"]
        lines += ["    " + line for line in inner]
        lines.append(f"}} while ({var} <= {n});")
        return lines
    raise ValueError(style)


# --- classification template families ----------------------------------------


def _t_for_accum(r: _Render) -> str:
    i, n, s = r.names("i", "n", "acc")
    decls = r.decl_block([f"int {n} = {r.jit(12, lo=3)};", f"int {s} = 0;"])
    decls.append(f"int {i};")
    body = _count_loop(r, i, n, [f"{s} = {s} + {i};"], "for")
    return _fn("main", "", decls, body, s)


def _t_while_accum(r: _Render) -> str:
    i, n, s = r.names("i", "n", "acc")
    decls = r.decl_block([f"int {n} = {r.jit(12, lo=3)};", f"int {s} = 0;"])
    decls.append(f"int {i};")
    body = _count_loop(r, i, n, [f"{s} = {s} + {i};"], "while")
    return _fn("main", "", decls, body, s)


def _t_dowhile_accum(r: _Render) -> str:
    i, n, s = r.names("i", "n", "acc")
    decls = r.decl_block([f"int {n} = {r.jit(12, lo=3)};", f"int {s} = 0;"])
    decls.append(f"int {i};")
    body = _count_loop(r, i, n, [f"{s} = {s} + {i};"], "dowhile")
    return _fn("main", "", decls, body, s)


def _t_nested_walk(r: _Render) -> str:
    i, j, n, s = r.names("i", "j", "n", "s")
    decls = r.decl_block([f"int {n} = {r.jit(6, lo=2)};", f"int {s} = 0;"])
    decls += [f"int {i};", f"int {j};"]
    inner = _for_loop(r, j, "0", n, [f"{s} = {s} + {i} * {j};"])
    body = _for_loop(r, i, "0", n, inner)
    return _fn("main", "", decls, body, s)


def _t_branch_chain(r: _Render) -> str:
    x, code = r.names("x", "code")
    a, b, c = sorted((r.jit(10), r.jit(20), r.jit(30)))
    decls = r.decl_block([f"int {x} = {r.jit(15)};", f"int {code} = 0;"])
    body = [
        f"if ({x} < {a}) {{",
        f"    {code} = 1;",
        f"}} else if ({x} < {b}) {{",
        f"    {code} = 2;",
        f"}} else if ({x} < {c}) {{",
        f"    {code} = 3;",
        "} else {",
        f"    {code} = 4;",
        "}",
    ]
    return _fn("main", "", decls, body, code)


def _t_switch_dispatch(r: _Render) -> str:
    x, out = r.names("x", "r")
    decls = r.decl_block([f"int {x} = {r.jit(9)};", f"int {out} = 0;"])
    body = [f"switch ({x} % 4) {{"]
    for arm in range(3):
        body += [f"case {arm}:",
                 f"    {out} = {r.jit(2 ** (arm + 1))};",
                 "    break;"]
    body += ["default:", f"    {out} = {r.jit(9)};", "    break;", "}"]
    return _fn("main", "", decls, body, out)


def _t_early_return(r: _Render) -> str:
    fn, i, target = r.names("find", "i", "t")
    bound = r.jit(40, lo=10)
    factor = r.jit(3, lo=2)
    inner = r.block([f"return {i};"])
    loop = _for_loop(r, i, "0", str(bound),
                     [f"if ({i} * {factor} == {target}) " + inner[0]]
                     + inner[1:])
    helper = _fn(fn, f"int {target}", [f"int {i};"], loop, "- 1")
    main = _fn("main", "", [], [], f"{fn}({r.jit(21)})")
    return helper + "\n" + main


def _t_recursive(r: _Render) -> str:
    fn, n = r.names("fact", "n")
    guard = r.block([f"return 1;"])
    body = [f"if ({n} < 2) " + guard[0]] + guard[1:]
    helper = _fn(fn, f"int {n}", [], body, f"{n} * {fn}({n} - 1)")
    main = _fn("main", "", [], [], f"{fn}({r.jit(8, lo=3)})")
    return helper + "\n" + main


def _t_straightline(r: _Render) -> str:
    a, b, c, d, e = r.names("a", "b", "c", "d", "e")
    decls = r.decl_block([
        f"int {a} = {r.jit(5)};",
        f"int {b} = {r.jit(9)};",
    ])
    body = [
        f"int {c} = {a} + {b};",
        f"int {d} = {c} * 2 - {a};",
        f"int {e} = {d} % {r.jit(7, lo=2)} + {b};",
        f"{c} = {e} * {e} - {d};",
    ]
    return _fn("main", "", decls, body, c)


def _t_mixed_while_branch(r: _Render) -> str:
    i, n, s = r.names("i", "n", "acc")
    decls = r.decl_block([f"int {n} = {r.jit(14, lo=4)};", f"int {s} = 0;"])
    decls.append(f"int {i} = 0;")
    body = [
        f"while ({i} < {n}) {{",
        f"    if ({i} % 2 == 0) {{",
        f"        {s} = {s} + {i};",
        "    } else {",
        f"        {s} = {s} - 1;",
        "    }",
        "    " + r.incr(i),
        "}",
    ]
    return _fn("main", "", decls, body, s)


CLASSIFY_TEMPLATES: list[tuple[str, Callable[[_Render], str]]] = [
    ("for_accumulate", _t_for_accum),
    ("while_accumulate", _t_while_accum),
    ("dowhile_accumulate", _t_dowhile_accum),
    ("nested_matrix_walk", _t_nested_walk),
    ("branch_chain", _t_branch_chain),
    ("switch_dispatch", _t_switch_dispatch),
    ("early_return_search", _t_early_return),
    ("recursive_compute", _t_recursive),
    ("straightline_arithmetic", _t_straightline),
    ("mixed_loop_branch", _t_mixed_while_branch),
]


# --- clone problems -------------------------------------------------------------
# Each problem is one computation rendered by 2-3 structurally distinct
# sub-templates. Problems differ from one another in tree shape even after
# identifier stripping (statement counts, nesting, call patterns, array use).


def _p_sum_linear(style: str):
    def rend(r: _Render) -> str:
        i, n, s = r.names("i", "n", "s")
        decls = r.decl_block([f"int {n} = {r.jit(15, lo=4)};", f"int {s} = 0;"])
        decls.append(f"int {i};")
        body = _count_loop(r, i, n, [f"{s} = {s} + {i};"], style)
        return _fn("main", "", decls, body, s)
    return rend


def _p_sum_squares(style: str):
    def rend(r: _Render) -> str:
        i, n, s = r.names("i", "n", "s")
        decls = r.decl_block([f"int {n} = {r.jit(11, lo=4)};", f"int {s} = 0;"])
        decls.append(f"int {i};")
        body = _count_loop(r, i, n, [f"{s} = {s} + {i} * {i};"], style)
        return _fn("main", "", decls, body, s)
    return rend


def _p_factorial(style: str):
    def rend(r: _Render) -> str:
        fn, n = r.names("fact", "n")
        guard = r.block(["return 1;"])
        head = [f"if ({n} < 2) " + guard[0]] + guard[1:]
        if style == "rec":
            helper = _fn(fn, f"int {n}", [], head, f"{n} * {fn}({n} - 1)")
        else:
            p, i = r.names("p", "i")
            loop = _count_loop(r, i, n, [f"{p} = {p} * {i};"], style)
            helper = _fn(fn, f"int {n}", head + [f"int {p} = 1;", f"int {i};"],
                         loop, p)
        main = _fn("main", "", [], [], f"{fn}({r.jit(7, lo=3)})")
        return helper + "\n" + main
    return rend


def _p_count_multiples(style: str):
    def rend(r: _Render) -> str:
        i, n, k, c = r.names("i", "n", "k", "cnt")
        decls = r.decl_block([
            f"int {n} = {r.jit(24, lo=8)};",
            f"int {k} = {r.jit(3, lo=2)};",
            f"int {c} = 0;",
        ])
        decls.append(f"int {i};")
        hit = r.block([f"{c} = {c} + 1;"])
        body = _count_loop(
            r, i, n, [f"if ({i} % {k} == 0) " + hit[0]] + hit[1:], style)
        return _fn("main", "", decls, body, c)
    return rend


def _p_max_track(style: str):
    def rend(r: _Render) -> str:
        i, n, best, t = r.names("i", "n", "best", "t")
        decls = r.decl_block([
            f"int {n} = {r.jit(13, lo=5)};",
            f"int {best} = 0;",
            f"int {t} = 0;",
        ])
        decls.append(f"int {i};")
        upd = r.block([f"{best} = {t};"])
        body = _count_loop(r, i, n, [
            f"{t} = {i} * ({n} - {i});",
            f"if ({t} > {best}) " + upd[0], *upd[1:],
        ], style)
        return _fn("main", "", decls, body, best)
    return rend


def _p_gcd(style: str):
    def rend(r: _Render) -> str:
        fn, a, b = r.names("gcd", "a", "b")
        if style == "rec":
            base = r.block([f"return {a};"])
            body = [f"if ({b} == 0) " + base[0]] + base[1:]
            helper = _fn(fn, f"int {a}, int {b}", [], body,
                         f"{fn}({b}, {a} % {b})")
        else:
            t = r.names("t")[0]
            body = [
                f"while ({b} != 0) {{",
                f"    {t} = {b};",
                f"    {b} = {a} % {b};",
                f"    {a} = {t};",
                "}",
            ]
            helper = _fn(fn, f"int {a}, int {b}", [f"int {t} = 0;"], body, a)
        main = _fn("main", "", [], [],
                   f"{fn}({r.jit(36, lo=10)}, {r.jit(24, lo=6)})")
        return helper + "\n" + main
    return rend


def _p_fibonacci(style: str):
    def rend(r: _Render) -> str:
        i, n, a, b, c = r.names("i", "n", "a", "b", "c")
        decls = r.decl_block([
            f"int {n} = {r.jit(9, lo=4)};",
            f"int {a} = 0;",
            f"int {b} = 1;",
            f"int {c} = 0;",
        ])
        decls.append(f"int {i};")
        body = _count_loop(r, i, n, [
            f"{c} = {a} + {b};",
            f"{a} = {b};",
            f"{b} = {c};",
        ], style)
        return _fn("main", "", decls, body, a)
    return rend


def _p_power(style: str):
    def rend(r: _Render) -> str:
        b, e, res = r.names("b", "e", "r")
        decls = r.decl_block([
            f"int {b} = {r.jit(3, lo=2)};",
            f"int {e} = {r.jit(9, lo=3)};",
            f"int {res} = 1;",
        ])
        odd = r.block([f"{res} = {res} * {b};"])
        inner = [
            f"if ({e} % 2 == 1) " + odd[0], *odd[1:],
            f"{b} = {b} * {b};",
            f"{e} = {e} / 2;",
        ]
        if style == "dowhile":
            body = ["do {"] + ["    " + ln for ln in inner]
            body.append(f"}} while ({e} > 0);")
        else:
            blk = r.block(inner)
            body = [f"while ({e} > 0) " + blk[0]] + blk[1:]
        return _fn("main", "", decls, body, res)
    return rend


def _p_digit_sum(style: str):
    def rend(r: _Render) -> str:
        n, s = r.names("n", "s")
        decls = r.decl_block([
            f"int {n} = {r.jit(5321, lo=100)};",
            f"int {s} = 0;",
        ])
        inner = [
            f"{s} = {s} + {n} % 10;",
            f"{n} = {n} / 10;",
        ]
        if style == "dowhile":
            body = ["do {"] + ["    " + ln for ln in inner]
            body.append(f"}} while ({n} > 0);")
        else:
            blk = r.block(inner)
            body = [f"while ({n} > 0) " + blk[0]] + blk[1:]
        return _fn("main", "", decls, body, s)
    return rend


def _p_two_pointer(style: str):
    def rend(r: _Render) -> str:
        arr, i, lo, hi, s = r.names("a", "i", "lo", "hi", "s")
        size = r.jit(8, lo=4)
        decls = [f"int {arr}[{size}];", f"int {i};"]
        fill = _for_loop(r, i, "0", str(size),
                         [f"{arr}[{i}] = {i} * {r.jit(3, lo=2)};"])
        mids = r.decl_block([
            f"int {lo} = 0;",
            f"int {hi} = {size - 1};",
            f"int {s} = 0;",
        ])
        if style == "for":
            scan = [
                f"for ({lo} = 0; {lo} < {hi}; {r.incr(lo)[:-1]}) {{",
                f"    {s} = {s} + {arr}[{lo}] + {arr}[{hi}];",
                "    " + r.decr(hi),
                "}",
            ]
        else:
            scan = [
                f"while ({lo} < {hi}) {{",
                f"    {s} = {s} + {arr}[{lo}] + {arr}[{hi}];",
                "    " + r.incr(lo),
                "    " + r.decr(hi),
                "}",
            ]
        return _fn("main", "", decls, fill + mids + scan, s)
    return rend


def _p_linear_search(style: str):
    def rend(r: _Render) -> str:
        fn, i, target = r.names("find", "i", "t")
        bound = r.jit(30, lo=10)
        factor = r.jit(4, lo=2)
        found = r.block([f"return {i};"])
        check = [f"if ({i} * {factor} == {target}) " + found[0]] + found[1:]
        if style == "for":
            loop = _for_loop(r, i, "0", str(bound), check)
            helper = _fn(fn, f"int {target}", [f"int {i};"], loop, "- 1")
        else:
            loop = [f"while ({i} < {bound}) {{"]
            loop += ["    " + ln for ln in check]
            loop.append("    " + r.incr(i))
            loop.append("}")
            helper = _fn(fn, f"int {target}", [f"int {i} = 0;"], loop, "- 1")
        main = _fn("main", "", [], [], f"{fn}({r.jit(16, lo=4)})")
        return helper + "\n" + main
    return rend


def _p_pair_count(style: str):
    def rend(r: _Render) -> str:
        i, j, n, c = r.names("i", "j", "n", "cnt")
        decls = r.decl_block([f"int {n} = {r.jit(7, lo=3)};", f"int {c} = 0;"])
        decls += [f"int {i};", f"int {j};"]
        hit = r.block([f"{c} = {c} + 1;"])
        inner = _for_loop(r, j, "0", n,
                          [f"if ({i} < {j}) " + hit[0]] + hit[1:])
        if style == "whilefor":
            body = [f"{i} = 0;", f"while ({i} < {n}) {{"]
            body += ["    " + ln for ln in inner]
            body.append("    " + r.incr(i))
            body.append("}")
        else:
            body = _for_loop(r, i, "0", n, inner)
        return _fn("main", "", decls, body, c)
    return rend


def _p_switch_in_loop(style: str):
    def rend(r: _Render) -> str:
        i, n, res = r.names("i", "n", "r")
        decls = r.decl_block([f"int {n} = {r.jit(12, lo=5)};", f"int {res} = 0;"])
        decls.append(f"int {i};")
        sw = [f"switch ({i} % 3) {{",
              "case 0:",
              f"    {res} = {res} + {r.jit(1)};",
              "    break;",
              "case 1:",
              f"    {res} = {res} + {r.jit(2)};",
              "    break;",
              "default:",
              f"    {res} = {res} + {r.jit(3)};",
              "    break;",
              "}"]
        body = _count_loop(r, i, n, sw, style)
        return _fn("main", "", decls, body, res)
    return rend


def _p_range_classify(style: str):
    def rend(r: _Render) -> str:
        x, res = r.names("x", "r")
        a, b = sorted((r.jit(10, lo=2), r.jit(25, lo=12)))
        decls = r.decl_block([f"int {x} = {r.jit(17)};", f"int {res} = 0;"])
        if style == "chain":
            body = [
                f"if ({x} < {a}) {{",
                f"    {res} = 1;",
                f"}} else if ({x} < {b}) {{",
                f"    {res} = 2;",
                "} else {",
                f"    {res} = 3;",
                "}",
            ]
        else:
            s1 = r.block([f"{res} = 1;"])
            s2 = r.block([f"{res} = 2;"])
            s3 = r.block([f"{res} = 3;"])
            body = ([f"if ({x} < {a}) " + s1[0]] + s1[1:]
                    + [f"if ({x} >= {a} && {x} < {b}) " + s2[0]] + s2[1:]
                    + [f"if ({x} >= {b}) " + s3[0]] + s3[1:])
        return _fn("main", "", decls, body, res)
    return rend


def _p_array_sum(style: str):
    def rend(r: _Render) -> str:
        arr, i, s = r.names("a", "i", "s")
        size = r.jit(9, lo=4)
        decls = [f"int {arr}[{size}];", f"int {i};", f"int {s} = 0;"]
        fill = _for_loop(r, i, "0", str(size),
                         [f"{arr}[{i}] = {i} + {r.jit(5)};"])
        if style == "while":
            scan = [f"{i} = 0;", f"while ({i} < {size}) {{",
                    f"    {s} = {s} + {arr}[{i}];",
                    "    " + r.incr(i),
                    "}"]
        else:
            scan = _for_loop(r, i, "0", str(size),
                             [f"{s} = {s} + {arr}[{i}];"])
        return _fn("main", "", decls, fill + scan, s)
    return rend


def _p_collatz_steps(style: str):
    def rend(r: _Render) -> str:
        n, c = r.names("n", "steps")
        decls = r.decl_block([
            f"int {n} = {r.jit(27, lo=5)};",
            f"int {c} = 0;",
        ])
        even = [f"{n} = {n} / 2;"]
        odd = [f"{n} = 3 * {n} + 1;"]
        if style == "guarded":
            eb = r.block(even)
            ob = r.block(odd)
            inner = ([f"if ({n} % 2 == 0) " + eb[0]] + eb[1:]
                     + [f"if ({n} % 2 == 1) " + ob[0]] + ob[1:]
                     + [r.incr(c)])
        else:
            inner = ([f"if ({n} % 2 == 0) {{"]
                     + ["    " + ln for ln in even]
                     + ["} else {"]
                     + ["    " + ln for ln in odd]
                     + ["}", r.incr(c)])
        blk = r.block(inner)
        body = [f"while ({n} > 1) " + blk[0]] + blk[1:]
        return _fn("main", "", decls, body, c)
    return rend


CLONE_PROBLEMS: list[tuple[str, list[Callable[[_Render], str]]]] = [
    ("sum_linear", [_p_sum_linear("for"), _p_sum_linear("while")]),
    ("sum_squares", [_p_sum_squares("for"), _p_sum_squares("while")]),
    ("factorial", [_p_factorial("for"), _p_factorial("rec")]),
    ("count_multiples", [_p_count_multiples("for"),
                         _p_count_multiples("while")]),
    ("max_track", [_p_max_track("for"), _p_max_track("while")]),
    ("gcd", [_p_gcd("while"), _p_gcd("rec")]),
    ("fibonacci", [_p_fibonacci("for"), _p_fibonacci("while")]),
    ("power", [_p_power("while"), _p_power("dowhile")]),
    ("digit_sum", [_p_digit_sum("while"), _p_digit_sum("dowhile")]),
    ("two_pointer", [_p_two_pointer("while"), _p_two_pointer("for")]),
    ("linear_search", [_p_linear_search("for"), _p_linear_search("while")]),
    ("pair_count", [_p_pair_count("forfor"), _p_pair_count("whilefor")]),
    ("switch_in_loop", [_p_switch_in_loop("for"), _p_switch_in_loop("while")]),
    ("range_classify", [_p_range_classify("chain"),
                        _p_range_classify("separate")]),
    ("array_sum", [_p_array_sum("for"), _p_array_sum("while")]),
    ("collatz_steps", [_p_collatz_steps("ifelse"), _p_collatz_steps("guarded")]),
]


# --- generation ------------------------------------------------------------------


def render_file(spec: CorpusSpec, group: int, idx: int) -> str:
    """Render one corpus file; retries with fresh variation until it parses."""
    if spec.task == "classify":
        name, template = CLASSIFY_TEMPLATES[group]
    else:
        name, styles = CLONE_PROBLEMS[group]
        template = styles[idx % len(styles)]
    for attempt in range(100):
        rng = _seeded_rng(spec.seed, "file", spec.task, group, idx, attempt)
        source = template(_Render(rng, spec)) + "\n"
        try:
            ast = parse_source(source)
            validate_ast(ast)
        except Exception:
            continue
        return source
    raise GenerationExhausted(name, spec.seed)


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def generate_corpus(spec: CorpusSpec, out_dir) -> dict:
    """Write the corpus tree and manifest.json; returns the manifest."""
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    key = "class_id" if spec.task == "classify" else "problem_id"
    files: list[dict] = []
    for group in range(spec.n_groups):
        group_dir = root / str(group)
        group_dir.mkdir(exist_ok=True)
        for idx in range(spec.per_class):
            source = render_file(spec, group, idx)
            rel = f"{group}/{idx:03d}.c"
            _atomic_write(root / rel, source)
            files.append({"path": rel, key: group})
    train, valid, test = make_splits(files, (8, 1, 1), seed=spec.seed,
                                     stratify=lambda f: f[key])
    for split_name, split_files in (("train", train), ("valid", valid),
                                    ("test", test)):
        for record in split_files:
            record["split"] = split_name
    files.sort(key=lambda f: f["path"])
    manifest = {
        "format": MANIFEST_FORMAT,
        "generator_version": GENERATOR_VERSION,
        "task": spec.task,
        "seed": spec.seed,
        "n_classes": spec.n_classes,
        "n_problems": spec.n_problems,
        "per_class": spec.per_class,
        "knobs": {
            "rename_prob": spec.rename_prob,
            "loop_swap_prob": spec.loop_swap_prob,
            "const_jitter": spec.const_jitter,
            "shuffle_prob": spec.shuffle_prob,
            "dead_code_prob": spec.dead_code_prob,
        },
        "files": files,
    }
    _atomic_write(root / "manifest.json",
                  json.dumps(manifest, sort_keys=True, separators=(",", ":"))
                  + "\n")
    return manifest


def load_manifest(corpus_dir) -> dict:
    path = Path(corpus_dir) / "manifest.json"
    manifest = json.loads(path.read_text(encoding="utf-8"))
    if manifest.get("format") != MANIFEST_FORMAT:
        raise ValueError(f"unknown manifest format in {path}")
    return manifest


def load_corpus(corpus_dir) -> tuple[dict, list[dict]]:
    """Read a corpus: the manifest plus one parsed record per file.

    Records carry path, group id, split and the parsed AST.
    """
    root = Path(corpus_dir)
    manifest = load_manifest(root)
    key = "class_id" if manifest["task"] == "classify" else "problem_id"
    records = []
    for entry in manifest["files"]:
        source = (root / entry["path"]).read_text(encoding="utf-8")
        records.append({
            "path": entry["path"],
            "group": entry[key],
            "split": entry["split"],
            "ast": parse_source(source),
        })
    return manifest, records
