"""Dynamic rescheduling engine.

Turns natural-language disturbance descriptions into constraint patches on
workforce scheduling models, re-solves under a perturbation bound, and
scores patch quality with automatic evaluation rules.
"""

__version__ = "0.1.0"
