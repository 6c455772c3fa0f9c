"""specinpaint: interactive instrument-sound generation by codemap inpainting.

Sounds are compressed into two small integer grids by a hierarchical
vector-quantized autoencoder over Mel-IF spectrograms; masked
encoder-decoder Transformers then regenerate user-selected regions of
those grids, and the codec turns the result back into audio.
"""

__version__ = "0.1.0"
