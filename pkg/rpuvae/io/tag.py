# Authors: rpuvae developers
#
# License: BSD (3-clause)

import struct
import numpy as np

from .constants import CKPT


class Tag(object):
    """Tag of a checkpoint file

    Parameters
    ----------
    kind : int
        Kind of Tag.
    type_ : int
        Type of Tag.
    size : int
        Size of the data in bytes.
    pos : int
        Position of the Tag in the file.
    """

    def __init__(self, kind, type_, size, pos=None):
        self.kind = int(kind)
        self.type = int(type_)
        self.size = int(size)
        self.pos = pos
        self.data = None

    def __repr__(self):
        return "kind: %s - type: %s - size: %s - pos: %s" % (
            self.kind, self.type, self.size, self.pos)


def read_tag(fid):
    """Read the Tag at the current position of a checkpoint file

    Parameters
    ----------
    fid : file
        The open checkpoint file descriptor.

    Returns
    -------
    tag : Tag
        The Tag read, with its data decoded.
    """
    pos = fid.tell()
    s = fid.read(3 * 4)
    if len(s) < 12:
        raise IOError('Truncated checkpoint: no tag header at byte %d' % pos)
    tag = Tag(*struct.unpack('>iii', s), pos=pos)
    if tag.size < 0:
        raise IOError('Corrupted checkpoint: negative tag size at byte %d'
                      % pos)
    raw = fid.read(tag.size)
    if len(raw) < tag.size:
        raise IOError('Truncated checkpoint: tag %d at byte %d needs %d '
                      'bytes' % (tag.kind, pos, tag.size))

    if tag.type == CKPT.TYPE_INT:
        tag.data = np.frombuffer(raw, dtype='>i4').astype(np.int64)
    elif tag.type == CKPT.TYPE_DOUBLE:
        tag.data = np.frombuffer(raw, dtype='>f8').astype(np.float64)
    elif tag.type == CKPT.TYPE_STRING:
        tag.data = raw.decode('utf-8')
    elif tag.type == CKPT.TYPE_MATRIX_DOUBLE:
        #   data, then the dimensions in reverse order, then ndim
        ndim = int(np.frombuffer(raw[-4:], dtype='>i4')[0])
        if ndim < 1 or 4 * (ndim + 1) > tag.size:
            raise IOError('Corrupted checkpoint: bad matrix tag at byte %d'
                          % pos)
        dims = np.frombuffer(raw[-4 * (ndim + 1):-4], dtype='>i4')[::-1]
        n_bytes = 8 * int(np.prod(dims))
        if n_bytes + 4 * (ndim + 1) != tag.size:
            raise IOError('Corrupted checkpoint: matrix tag at byte %d has '
                          'inconsistent size' % pos)
        tag.data = np.frombuffer(raw[:n_bytes], dtype='>f8') \
                     .astype(np.float64).reshape(tuple(dims))
    else:
        raise IOError('Unknown tag type %d at byte %d' % (tag.type, pos))
    return tag
