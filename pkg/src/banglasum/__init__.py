"""Bengali abstractive news summarization pipeline.

Corpus cleaning and splits (`corpus`), tokenization/vocabulary/buckets
(`textproc`), hand-rolled numeric kernels (`nnkernel`), the attention
LSTM encoder-decoder with training and greedy decoding (`seq2seq`),
ROUGE/BLEU scoring (`metrics`) and the command-line pipeline (`cli`).
"""

__version__ = "0.1.0"
