"""Zero-shot phrase grounding over serialized diffusion-attention tensors.

Pipeline stages: per-word cross-attention fusion, anchor selection,
self-attention aggregation, binarization, candidate-mask refinement,
and average-recall evaluation.
"""

from attnseg.pipeline import PipelineConfig, run_pipeline

__version__ = "0.1.0"

__all__ = ["PipelineConfig", "run_pipeline", "__version__"]
