"""gazestream: egocentric gaze + video into temporally grounded streaming QA.

Pipeline: gaze ingestion and projection -> fixation extraction -> FOV
object extraction through a pluggable multimodal oracle -> scanpaths ->
ten QA task generators -> streaming evaluation harness, plus a human
verification service with a companion web UI.
"""

__version__ = "0.1.0"
