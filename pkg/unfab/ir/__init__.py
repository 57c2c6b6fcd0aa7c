from unfab.ir._analysis import consumed_context
from unfab.ir._analysis import DefUse
from unfab.ir._analysis import merges
from unfab.ir._analysis import produced_context
from unfab.ir._analysis import splits
from unfab.ir._builtins import builtin_info
from unfab.ir._builtins import BuiltinInfo
from unfab.ir._builtins import BUILTINS
from unfab.ir._builtins import is_builtin
from unfab.ir._diagnostics import Diagnostic
from unfab.ir._effect import Effect
from unfab.ir._expr import angle_radians
from unfab.ir._expr import as_expr
from unfab.ir._expr import BinOp
from unfab.ir._expr import Const
from unfab.ir._expr import Expr
from unfab.ir._expr import format_angle
from unfab.ir._expr import Ref
from unfab.ir._nodes import canonical_modes
from unfab.ir._nodes import cvar
from unfab.ir._nodes import fresh_name
from unfab.ir._nodes import FunctionDef
from unfab.ir._nodes import gvar
from unfab.ir._nodes import Literal
from unfab.ir._nodes import make_condition
from unfab.ir._nodes import Mode
from unfab.ir._nodes import ModeKey
from unfab.ir._nodes import Operation
from unfab.ir._nodes import Program
from unfab.ir._nodes import qvar
from unfab.ir._nodes import SourceSpan
from unfab.ir._nodes import Statement
from unfab.ir._nodes import Substitution
from unfab.ir._nodes import Var
from unfab.ir._nodes import VarKind
from unfab.ir._structure import alpha_equivalent
from unfab.ir._structure import check_program
from unfab.ir._structure import effect_of
from unfab.ir._structure import make_statement
from unfab.ir._structure import op_effect
from unfab.ir._structure import Signature
from unfab.ir._structure import signature
from unfab.ir._structure import structural_check


__all__ = [
    "BUILTINS",
    "BinOp",
    "BuiltinInfo",
    "Const",
    "DefUse",
    "Diagnostic",
    "Effect",
    "Expr",
    "FunctionDef",
    "Literal",
    "Mode",
    "ModeKey",
    "Operation",
    "Program",
    "Ref",
    "Signature",
    "SourceSpan",
    "Statement",
    "Substitution",
    "Var",
    "VarKind",
    "alpha_equivalent",
    "angle_radians",
    "as_expr",
    "builtin_info",
    "canonical_modes",
    "check_program",
    "consumed_context",
    "cvar",
    "effect_of",
    "format_angle",
    "fresh_name",
    "gvar",
    "is_builtin",
    "make_condition",
    "make_statement",
    "merges",
    "op_effect",
    "produced_context",
    "qvar",
    "signature",
    "splits",
    "structural_check",
]
