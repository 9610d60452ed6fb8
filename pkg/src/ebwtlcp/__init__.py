"""External-memory construction of the EBWT, LCP array and generalized
suffix array of a string collection."""
from .alphabet import Alphabet, CollectionMeta, build_alphabet
from .builder import (BuildOptions, BuildResult, IterationTrace, Outputs, build_file, build_strings,
                      load_outputs)
from .errors import EbwtLcpError
from .oracle import naive_ebwt, naive_gsa, naive_lcp, naive_rmq_lcp
from .verify import AuditReport, audit_build, invert_ebwt, verify_outputs

__version__ = "0.1.0"

__all__ = [
    "Alphabet", "CollectionMeta", "build_alphabet",
    "BuildOptions", "BuildResult", "IterationTrace", "Outputs", "build_file", "build_strings",
    "load_outputs", "EbwtLcpError", "naive_ebwt", "naive_gsa", "naive_lcp", "naive_rmq_lcp",
    "AuditReport", "audit_build", "invert_ebwt", "verify_outputs",
]
