"""Single-assignment (passive) form.

After loop elimination a body is assign/havoc/assert/assume/if. Passify
renames each write to a fresh version of the variable: version 0 keeps
the bare name (the entry value), later versions are `x@1`, `x@2`, ...
Assignments become equality assumptions, havocs just bump the version,
and branch joins equate a fresh version with each branch's last. The
result has no assignments at all, so wp needs no substitution.
"""

from __future__ import annotations

from miniproof.diagnostics import InternalError
from miniproof.ivl.ast import (
    App,
    Expr,
    IvlProcedure,
    Labeled,
    Quant,
    SAssert,
    SAssign,
    SAssume,
    SHavoc,
    SIf,
    Stmt,
    Var,
    eq,
)


def passify(proc: IvlProcedure) -> IvlProcedure:
    sorts: dict[str, str] = {v.name: v.sort for v in proc.params + proc.locals}
    max_version: dict[str, int] = {}
    created: list[Var] = []

    def var_at(name: str, version: int) -> Var:
        if version == 0:
            return Var(name, sorts[name])
        return Var(f"{name}@{version}", sorts[name])

    def alloc(name: str) -> int:
        version = max_version.get(name, 0) + 1
        max_version[name] = version
        created.append(var_at(name, version))
        return version

    def rewrite(e: Expr, versions: dict[str, int]) -> Expr:
        def go(x: Expr, bound: frozenset[str]) -> Expr:
            if isinstance(x, Var):
                if x.name in bound or x.name not in sorts:
                    return x
                return var_at(x.name, versions.get(x.name, 0))
            if isinstance(x, App):
                return App(x.fn, tuple(go(a, bound) for a in x.args), x.sort)
            if isinstance(x, Quant):
                inner = bound | {n for n, _ in x.bound}
                return Quant(
                    x.kind,
                    x.bound,
                    go(x.body, inner),
                    tuple(tuple(go(p, inner) for p in g) for g in x.patterns),
                )
            if isinstance(x, Labeled):
                return Labeled(x.label, go(x.expr, bound))
            return x

        return go(e, frozenset())

    def pass_stmts(
        stmts: list[Stmt], versions: dict[str, int]
    ) -> tuple[list[Stmt], dict[str, int]]:
        out: list[Stmt] = []
        for s in stmts:
            if isinstance(s, SAssign):
                value = rewrite(s.expr, versions)
                versions[s.name] = alloc(s.name)
                out.append(SAssume(eq(var_at(s.name, versions[s.name]), value)))
            elif isinstance(s, SHavoc):
                versions[s.name] = alloc(s.name)
            elif isinstance(s, SAssert):
                out.append(SAssert(s.label, rewrite(s.expr, versions)))
            elif isinstance(s, SAssume):
                out.append(SAssume(rewrite(s.expr, versions)))
            elif isinstance(s, SIf):
                cond = rewrite(s.cond, versions)
                then_out, then_ver = pass_stmts(s.then, dict(versions))
                else_out, else_ver = pass_stmts(s.els, dict(versions))
                joined = dict(versions)
                names = sorted(set(then_ver) | set(else_ver))
                for name in names:
                    tv = then_ver.get(name, 0)
                    ev = else_ver.get(name, 0)
                    if tv == ev:
                        joined[name] = tv
                        continue
                    jv = alloc(name)
                    then_out.append(SAssume(eq(var_at(name, jv), var_at(name, tv))))
                    else_out.append(SAssume(eq(var_at(name, jv), var_at(name, ev))))
                    joined[name] = jv
                out.append(SIf(cond, then_out, else_out))
                versions = joined
            else:
                raise InternalError(
                    f"{proc.name}: {type(s).__name__} in passification input"
                )
        return out, versions

    body, final = pass_stmts(proc.body, {})
    ensures = [(label, rewrite(e, final)) for label, e in proc.ensures]
    return IvlProcedure(
        name=proc.name,
        params=list(proc.params),
        locals=list(proc.locals) + created,
        requires=list(proc.requires),
        ensures=ensures,
        body=body,
        labels=dict(proc.labels),
    )
