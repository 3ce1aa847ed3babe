from .ast import Program, Type, sexpr
from .features import FeatureVector, extract_features
from .lexer import CompileError, LexError, Token, TokenKind, lex, render
from .parser import DEFAULT_MAX_DEPTH, ParseDepthExceeded, ParseError, parse, parse_expression
from .typecheck import MissingMain, TypeCheckError, UndefinedFunction, UndefinedVariable, typecheck

__all__ = [
    "CompileError", "FeatureVector", "LexError", "MissingMain", "ParseDepthExceeded",
    "ParseError", "Program", "Token", "TokenKind", "Type", "TypeCheckError",
    "UndefinedFunction", "UndefinedVariable", "DEFAULT_MAX_DEPTH", "extract_features",
    "lex", "parse", "parse_expression", "render", "sexpr", "typecheck",
]
