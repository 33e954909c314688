"""ECG classification workbench: synthetic 12-lead data, wavelet denoising,
PCA, six from-scratch neural architectures, AdamW training, and evaluation."""
from .kernels import backend_name

__version__ = "0.1.0"
__all__ = ["backend_name", "__version__"]
