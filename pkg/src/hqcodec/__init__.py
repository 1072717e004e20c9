"""hqcodec: hierarchical stochastic vector-quantized autoencoder codec."""

__version__ = "0.1.0"
