import numpy as np

from gaitbench import FrameSequence


def const_seq(value, n=1, h=64, w=64):
    return FrameSequence(np.full((n, h, w, 3), value, dtype=np.uint8))


def random_seq(gen, n=None, h=None, w=None):
    n = n or int(gen.integers(2, 12))
    h = h or int(gen.integers(24, 48))
    w = w or int(gen.integers(24, 48))
    return FrameSequence(gen.integers(0, 256, (n, h, w, 3), dtype=np.uint8))
