# Authors: rpuvae developers
#
# License: BSD (3-clause)

import numpy as np

from .constants import CKPT


def _write(fid, data, kind, type_):
    data = bytes(data)
    fid.write(np.array([kind, type_, len(data)], dtype='>i4').tobytes())
    fid.write(data)


def write_int(fid, kind, data):
    """Writes a 32-bit integer tag"""
    data = np.atleast_1d(np.array(data, dtype='>i4'))
    _write(fid, data.tobytes(), kind, CKPT.TYPE_INT)


def write_double(fid, kind, data):
    """Writes a double-precision floating point tag"""
    data = np.atleast_1d(np.array(data, dtype='>f8'))
    _write(fid, data.tobytes(), kind, CKPT.TYPE_DOUBLE)


def write_string(fid, kind, data):
    """Writes a UTF-8 string tag"""
    _write(fid, str(data).encode('utf-8'), kind, CKPT.TYPE_STRING)


def write_double_matrix(fid, kind, mat):
    """Writes a row-major double-precision array tag with its shape"""
    mat = np.asarray(mat)
    dims = np.array(mat.shape[::-1] + (mat.ndim,), dtype='>i4')
    data = np.ascontiguousarray(mat, dtype='>f8').tobytes() + dims.tobytes()
    _write(fid, data, kind, CKPT.TYPE_MATRIX_DOUBLE)


def start_file(fname):
    """Opens a checkpoint file for writing and writes the magic bytes"""
    fid = open(fname, 'wb')
    fid.write(CKPT.MAGIC)
    write_int(fid, CKPT.KIND_VERSION, CKPT.VERSION)
    return fid


def end_file(fid):
    """Writes the closing tag and closes the file"""
    _write(fid, b'', CKPT.KIND_END, CKPT.TYPE_INT)
    fid.close()
