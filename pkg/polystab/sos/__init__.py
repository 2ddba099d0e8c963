from polystab.sos.certificate import GramBasis, GramBlock, GramCertificate, SosReport, verify_sos
from polystab.sos.compiler import (
    SosSolution,
    build_basis,
    certify_fixed,
    check_sos,
    compile,
    extract_solution,
    scalarize_matrix_sos,
    solve_program,
    sos_margin,
)
from polystab.sos.program import DecisionPolynomial, SosConstraint, SosProgram, monomials_up_to

__all__ = (
    'DecisionPolynomial',
    'GramBasis',
    'GramBlock',
    'GramCertificate',
    'SosConstraint',
    'SosProgram',
    'SosReport',
    'SosSolution',
    'build_basis',
    'certify_fixed',
    'check_sos',
    'compile',
    'extract_solution',
    'monomials_up_to',
    'scalarize_matrix_sos',
    'solve_program',
    'sos_margin',
    'verify_sos',
)
