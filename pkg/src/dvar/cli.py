"""Command-line front end: ``dvar [--input FILE] [--json] [--certify] COMMAND ARGS...``.

Wherever a D-variety is expected, give either ``VARIETY SECTION`` or the name
of an ODE block (which is compiled first).  Exit codes: 0 ok, 1 invalid
(a well-posed check that fails), 2 error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

from .dmaps import (
    NotIntoTarget,
    NotIrreducible,
    RationalMap,
    darboux_polynomials,
    first_integral_map,
    image_closure,
    is_d_rational_map,
    polynomial_first_integrals,
    rational_first_integrals,
)
from .dvariety import (
    DVariety,
    DecompositionMismatch,
    EmptyVariety,
    NotASubvariety,
    NotOnVariety,
    Variety,
    components_delta_check,
    generic_type_dimension,
    induced_derivation,
    is_d_point,
    is_d_subvariety,
    product,
    prolongation,
    tangent_bundle,
    validate_section,
)
from .groebner import krull_dimension, normal_form
from .ode import CompileError, compile_ode, type_signature
from .parse import ParseError, parse_polynomial
from .poly import ContextMismatch, DerivationSpec, derivation_apply, rf_delta
from .session import SessionDocument, load_session, parse_constant

__all__ = ["CommandResult", "CommandError", "run_command", "main", "COMMANDS"]

EXIT = {"ok": 0, "invalid": 1, "error": 2}


class CommandError(Exception):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col


@dataclass
class CommandResult:
    status: str
    verdict: dict | None = None
    certificates: dict | None = None
    diagnostic: dict | None = None

    @property
    def exit_code(self) -> int:
        return EXIT[self.status]

    def to_dict(self) -> dict:
        out = {"status": self.status, "verdict": self.verdict, "certificates": self.certificates}
        if self.diagnostic is not None:
            out["diagnostic"] = self.diagnostic
        return out


# ---------------------------------------------------------------------------
# operand resolution


@dataclass
class _Run:
    doc: SessionDocument
    ops: list
    certify: bool = False
    degree: int | None = None
    cofactor: int | None = None
    ideal: str | None = None
    pos: int = 0
    _compiled: dict = field(default_factory=dict)

    def take(self, what: str) -> str:
        if self.pos >= len(self.ops):
            raise CommandError(f"arity mismatch: missing {what}")
        self.pos += 1
        return self.ops[self.pos - 1]

    def done(self):
        if self.pos != len(self.ops):
            raise CommandError(f"arity mismatch: unexpected argument {self.ops[self.pos]!r}")

    def compiled(self, name: str):
        if name not in self._compiled:
            self._compiled[name] = compile_ode(self.doc.odes[name])
        return self._compiled[name]

    def variety(self) -> Variety:
        name = self.take("variety")
        if name in self.doc.varieties:
            return self.doc.varieties[name]
        if name in self.doc.odes:
            return self.compiled(name).dvariety.variety
        raise CommandError(f"{name!r} is not a variety or ode")

    def pair(self):
        """(Variety, Section) from ``V s``, or the compiled pair from an ode name."""
        name = self.take("variety or ode")
        if name in self.doc.odes:
            D = self.compiled(name).dvariety
            return D.variety, D.section
        if name not in self.doc.varieties:
            raise CommandError(f"{name!r} is not a variety or ode")
        sname = self.take("section")
        if sname not in self.doc.sections:
            raise CommandError(f"{sname!r} is not a section")
        vname, s = self.doc.sections[sname]
        if vname != name:
            raise CommandError(f"section {sname} is declared on {vname}, not {name}")
        return self.doc.varieties[name], s

    def dvariety(self) -> DVariety:
        V, s = self.pair()
        check = validate_section(V, s)
        if not check.valid:
            raise CommandError("the section is not a valid section of the prolongation; run validate")
        return check.dvariety

    def ideal_operand(self, name: str, ctx):
        """Generators of a variety named in the document, or a comma-separated expression list."""
        if name in self.doc.varieties:
            W = self.doc.varieties[name]
            if W.ctx.vars != ctx.vars or W.ctx.field != ctx.field:
                raise CommandError(f"variety {name} does not live in the ambient ring {list(ctx.vars)}")
            return [g.to_context(ctx) for g in W.gens]
        out = []
        for piece in name.split(","):
            if piece.strip():
                out.append(parse_polynomial(piece, ctx))
        return out


def _strs(polys):
    return [str(p) for p in polys]


def _cert(f, gb):
    c = normal_form(f, gb)
    return {"cofactors": _strs(c.cofactors), "basis": _strs(c.basis), "remainder": str(c.remainder)}


def _doubled(run: _Run, build):
    V = run.variety()
    run.done()
    T = build(V)
    return CommandResult("ok", {
        "variables": list(T.ctx.vars),
        "base_variables": list(T.base_vars),
        "dual_variables": list(T.dual_vars),
        "generators": _strs(T.gens),
    })


def cmd_tangent(run):
    return _doubled(run, tangent_bundle)


def cmd_prolong(run):
    return _doubled(run, prolongation)


def cmd_validate(run):
    V, s = run.pair()
    run.done()
    check = validate_section(V, s)
    verdict = {"valid": check.valid}
    residues = [{"generator": str(f), "residue": str(r)} for f, r in check.failures]
    if not check.valid:
        verdict["residues"] = residues
    certs = None
    if run.certify:
        gb = V.basis
        spec = DerivationSpec(V.ctx, s.components)
        spec_rows = []
        for f, r in zip(V.gens, check.residues):
            img = derivation_apply(f, spec)
            row = {"generator": str(f), "image": str(img), "normal_form": str(r)}
            row.update(_cert(img, gb))
            spec_rows.append(row)
        certs = {"generators": spec_rows}
    return CommandResult("ok" if check.valid else "invalid", verdict, certs)


def cmd_delta(run):
    D = run.dvariety()
    text = run.take("expression")
    run.done()
    f = parse_polynomial(text, D.ctx)
    value = induced_derivation(D, f)
    certs = None
    if run.certify:
        raw = derivation_apply(f, D.spec)
        certs = {"image": str(raw), **_cert(raw, D.variety.basis)}
    return CommandResult("ok", {"expression": str(f), "value": str(value)}, certs)


def cmd_dsub(run):
    D = run.dvariety()
    W = run.ideal_operand(run.take("subvariety"), D.ctx)
    run.done()
    check = is_d_subvariety(D, W)
    verdict = {"d_subvariety": check.is_d_subvariety}
    if not check:
        verdict["residues"] = [{"generator": str(h), "residue": str(r)} for h, r, ok in check.generators if not ok]
    certs = None
    if run.certify:
        certs = {"generators": [{"generator": str(h), "normal_form": str(r), "radical_member": ok}
                                for h, r, ok in check.generators]}
    return CommandResult("ok" if check else "invalid", verdict, certs)


def cmd_dpoint(run):
    D = run.dvariety()
    point = {}
    while run.pos < len(run.ops):
        item = run.take("assignment")
        if "=" not in item:
            raise CommandError(f"expected VAR=VALUE, got {item!r}")
        var, value = (t.strip() for t in item.split("=", 1))
        if var not in D.ctx.vars:
            raise CommandError(f"{var!r} is not a variable of the D-variety")
        point[var] = parse_constant(value, D.ctx.field)
    missing = [v for v in D.ctx.vars if v not in point]
    if missing:
        raise CommandError(f"arity mismatch: no value for {missing}")
    ok, diffs = is_d_point(D, point)
    fmt = D.ctx.field.format
    verdict = {"d_point": ok}
    if not ok:
        verdict["residues"] = [{"variable": v, "residue": fmt(d)} for v, d in diffs if d]
    return CommandResult("ok" if ok else "invalid", verdict)


def _describe(D: DVariety):
    return {
        "variables": list(D.ctx.vars),
        "generators": _strs(D.gens),
        "section": {v: str(c) for v, c in zip(D.ctx.vars, D.section.components)},
    }


def cmd_product(run):
    D1 = run.dvariety()
    D2 = run.dvariety()
    run.done()
    return CommandResult("ok", _describe(product(D1, D2)))


def cmd_components(run):
    D = run.dvariety()
    names = run.ops[run.pos:]
    run.pos = len(run.ops)
    if not names:
        raise CommandError("arity mismatch: no components given")
    comps = [run.ideal_operand(n, D.ctx) for n in names]
    ideal = run.ideal_operand(run.ideal, D.ctx) if run.ideal else None
    report = components_delta_check(D, comps, ideal)
    verdict = {
        "ambient_d_subvariety": report.ambient_ok,
        "components": [{"component": n, "d_subvariety": bool(c)} for n, c in zip(names, report.verdicts)],
    }
    residues = []
    for label, check in [("ideal", report.ambient)] + list(zip(names, report.verdicts)):
        for h, r, ok in check.generators:
            if not ok:
                residues.append({"component": label, "generator": str(h), "residue": str(r)})
    if residues:
        verdict["residues"] = residues
    return CommandResult("ok" if report.all_ok else "invalid", verdict)


def cmd_dim(run):
    name = run.ops[0] if run.ops else None
    if name in run.doc.varieties and len(run.ops) == 2:
        D = run.dvariety()
        dim = generic_type_dimension(D)
    else:
        V = run.variety()
        dim = krull_dimension(list(V.gens), ctx=V.ctx)
    run.done()
    return CommandResult("ok", {"dimension": "empty" if dim is None else dim})


def _ode(run):
    name = run.take("ode")
    if name not in run.doc.odes:
        raise CommandError(f"{name!r} is not an ode")
    return name


def cmd_compile_ode(run):
    name = _ode(run)
    run.done()
    c = run.compiled(name)
    D = c.dvariety
    lines = [f"variety {name}_V:", f"  vars = {', '.join(D.ctx.vars)}"]
    lines += [f"  gen = {g}" for g in D.gens]
    lines += ["  claims = prime", f"section {name}_s on {name}_V:"]
    lines += [f"  {v} = {s}" for v, s in zip(D.ctx.vars, D.section.components)]
    verdict = _describe(D)
    verdict.update({"jet_variables": list(c.jet_map), "localizer": c.localizer, "document": "\n".join(lines)})
    return CommandResult("ok", verdict)


def cmd_signature(run):
    name = _ode(run)
    run.done()
    sig = type_signature(run.doc.odes[name])
    return CommandResult("ok", {"order": sig.ell, "g": str(sig.g)})


def cmd_dmap_check(run):
    fname = run.take("map")
    if fname not in run.doc.maps:
        raise CommandError(f"{fname!r} is not a map")
    decl = run.doc.maps[fname]
    snames = [run.take("source section"), run.take("target section")]
    run.done()
    Ds = []
    for vname, sname in zip((decl.source, decl.target), snames):
        if sname not in run.doc.sections or run.doc.sections[sname][0] != vname:
            raise CommandError(f"{sname!r} is not a section on {vname}")
        check = validate_section(run.doc.varieties[vname], run.doc.sections[sname][1])
        if not check.valid:
            raise CommandError(f"section {sname} is not valid on {vname}; run validate")
        Ds.append(check.dvariety)
    f = RationalMap(Ds[0], Ds[1], decl.components)
    res = is_d_rational_map(f)
    verdict = {"d_rational": res.d_rational}
    if not res:
        verdict["residues"] = [{"coordinate": v, "residue": str(r)} for v, r, ok in res.coordinates if not ok]
    certs = None
    if run.certify:
        certs = {"coordinates": [{"coordinate": v, "normal_form": str(r), "radical_member": ok}
                                 for v, r, ok in res.coordinates]}
    return CommandResult("ok" if res else "invalid", verdict, certs)


def _bound(value, flag):
    if value is None:
        raise CommandError(f"{flag} is required")
    return value


def cmd_first_integrals(run):
    D = run.dvariety()
    run.done()
    res = polynomial_first_integrals(D, _bound(run.degree, "--degree"))
    certs = None
    if run.certify:
        certs = {"rechecks": [{"integral": str(p), "delta": str(induced_derivation(D, p))} for p in res.basis]}
    return CommandResult("ok", {"degree_bound": res.degree_bound, "basis": _strs(res.basis)}, certs)


def cmd_darboux(run):
    D = run.dvariety()
    run.done()
    found = darboux_polynomials(D, _bound(run.degree, "--degree"), _bound(run.cofactor, "--cofactor"))
    verdict = {"polynomials": [{"p": str(d.p), "cofactor": str(d.cofactor)} for d in found]}
    certs = None
    if run.certify:
        certs = {"rechecks": [{"p": str(d.p), "delta_minus_cofactor_times_p":
                               str(D.variety.basis.reduce(derivation_apply(d.p, D.spec) - d.cofactor * d.p))}
                              for d in found]}
    return CommandResult("ok", verdict, certs)


def cmd_rational_integrals(run):
    D = run.dvariety()
    run.done()
    found = rational_first_integrals(D, _bound(run.degree, "--degree"), _bound(run.cofactor, "--cofactor"))
    certs = None
    if run.certify:
        rows = []
        for phi in found:
            rows.append({"integral": str(phi),
                         "delta_numerator": str(D.variety.basis.reduce(rf_delta(phi, D.spec).num)),
                         "d_rational_map": is_d_rational_map(first_integral_map(D, phi)).d_rational})
        certs = {"rechecks": rows}
    return CommandResult("ok", {"integrals": _strs(found)}, certs)


def _image(run):
    fname = run.take("map")
    run.done()
    if fname not in run.doc.maps:
        raise CommandError(f"{fname!r} is not a map")
    decl = run.doc.maps[fname]
    f = RationalMap(run.doc.varieties[decl.source], run.doc.varieties[decl.target], decl.components)
    return image_closure(f)


def _image_verdict(rep):
    return {
        "image_closure": _strs(rep.image_closure),
        "image_dimension": rep.image_dimension,
        "source_dimension": rep.source_dimension,
        "target_dimension": rep.target_dimension,
    }


def cmd_dominant(run):
    rep = _image(run)
    verdict = {"dominant": rep.dominant, **_image_verdict(rep)}
    if not rep.dominant:
        verdict["residues"] = [{"image_dimension": rep.image_dimension,
                                "target_dimension": rep.target_dimension,
                                "image_closure": _strs(rep.image_closure)}]
    return CommandResult("ok" if rep.dominant else "invalid", verdict)


def cmd_genfinite(run):
    rep = _image(run)
    verdict = {"generically_finite": rep.generically_finite, **_image_verdict(rep)}
    if not rep.generically_finite:
        verdict["residues"] = [{"source_dimension": rep.source_dimension,
                                "image_dimension": rep.image_dimension}]
    return CommandResult("ok" if rep.generically_finite else "invalid", verdict)


COMMANDS = {
    "tangent": cmd_tangent,
    "prolong": cmd_prolong,
    "validate": cmd_validate,
    "delta": cmd_delta,
    "dsub": cmd_dsub,
    "dpoint": cmd_dpoint,
    "product": cmd_product,
    "components": cmd_components,
    "dim": cmd_dim,
    "compile-ode": cmd_compile_ode,
    "signature": cmd_signature,
    "dmap-check": cmd_dmap_check,
    "first-integrals": cmd_first_integrals,
    "darboux": cmd_darboux,
    "rational-integrals": cmd_rational_integrals,
    "dominant": cmd_dominant,
    "genfinite": cmd_genfinite,
}

_DOMAIN_ERRORS = (ValueError, KeyError, ArithmeticError)


def _error(message, line=None, col=None) -> CommandResult:
    diag = {"message": message}
    if line is not None:
        diag.update(line=line, col=col)
    return CommandResult("error", diagnostic=diag)


def run_command(doc: SessionDocument, command: str, operands, *, certify=False,
                degree=None, cofactor=None, ideal=None) -> CommandResult:
    """Dispatch one command against a loaded document."""
    handler = COMMANDS.get(command)
    if handler is None:
        return _error(f"unknown command {command!r}")
    run = _Run(doc, list(operands), certify, degree, cofactor, ideal)
    try:
        return handler(run)
    except CommandError as exc:
        return _error(exc.message, exc.line, exc.col)
    except ParseError as exc:
        return _error(exc.message, exc.line, exc.col)
    except (CompileError, NotIntoTarget, NotIrreducible, NotASubvariety, NotOnVariety,
            DecompositionMismatch, EmptyVariety, ContextMismatch) as exc:
        return _error(str(exc))
    except _DOMAIN_ERRORS as exc:
        return _error(str(exc))


# ---------------------------------------------------------------------------
# rendering


def _render_text(value, indent=0):
    pad = "  " * indent
    lines = []
    if isinstance(value, dict):
        for k, v in value.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.extend(_render_text(v, indent + 1))
            elif isinstance(v, str) and "\n" in v:
                lines.append(f"{pad}{k}: |")
                lines.extend(f"{pad}  {line}" for line in v.splitlines())
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, dict) and item:
                sub = _render_text(item, indent + 1)
                sub[0] = f"{pad}- " + sub[0].lstrip()
                lines.extend(sub)
            else:
                lines.append(f"{pad}- {_scalar(item)}")
    return lines


def _scalar(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (dict, list)):
        return "[]" if isinstance(v, list) else "{}"
    return str(v)


def render(result: CommandResult, as_json: bool) -> str:
    if as_json:
        return json.dumps(result.to_dict(), indent=2, sort_keys=True)
    out = {"status": result.status}
    if result.diagnostic:
        d = result.diagnostic
        where = f"{d['line']}:{d['col']}: " if "line" in d else ""
        out["error"] = where + d["message"]
    if result.verdict:
        out.update(result.verdict)
    if result.certificates:
        out["certificates"] = result.certificates
    return "\n".join(_render_text(out))


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", metavar="FILE", default=argparse.SUPPRESS,
                        help="session document (default: standard input)")
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="print a machine-readable result object")
    common.add_argument("--certify", action="store_true", default=argparse.SUPPRESS,
                        help="include normal-form and cofactor certificates")
    parser = _Parser(prog="dvar", description="Algebraic D-varieties from a session document.",
                     parents=[common])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common], help=(COMMANDS[name].__doc__ or "").strip() or None)
        p.add_argument("operands", nargs="*")
        if name in ("first-integrals", "darboux", "rational-integrals"):
            p.add_argument("--degree", type=int, metavar="N")
        if name in ("darboux", "rational-integrals"):
            p.add_argument("--cofactor", type=int, metavar="N")
        if name == "components":
            p.add_argument("--ideal", metavar="W", help="variety whose components are given (default: V itself)")
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    as_json = "--json" in argv
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise _ArgError("no command given")
    except _ArgError as exc:
        result = _error(str(exc))
        print(render(result, as_json))
        return result.exit_code
    as_json = getattr(args, "json", False)
    try:
        path = getattr(args, "input", None)
        if path is None or path == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        result = _error(f"cannot read input: {exc.strerror}")
    else:
        try:
            doc = load_session(text)
        except ParseError as exc:
            result = _error(exc.message, exc.line, exc.col)
        else:
            result = run_command(doc, args.command, args.operands,
                                 certify=getattr(args, "certify", False),
                                 degree=getattr(args, "degree", None),
                                 cofactor=getattr(args, "cofactor", None),
                                 ideal=getattr(args, "ideal", None))
    print(render(result, as_json))
    return result.exit_code
