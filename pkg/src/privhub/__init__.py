"""Privacy hub for smart-home apps.

Apps declare device-to-cloud pipelines in JSON manifests built from a
fixed operator vocabulary.  The hub statically derives what content can
leave the home, asks the user, rewrites pipelines to enforce stricter
policies, and runs them under full egress mediation with an append-only
ledger.
"""

from .manifest import RUNTIME_VERSION

__version__ = "0.1.0"
__all__ = ["RUNTIME_VERSION", "__version__"]
