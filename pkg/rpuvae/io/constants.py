# Authors: rpuvae developers
#
# License: BSD (3-clause)


class Bunch(dict):
    """ Container object for datasets: dictionnary-like object that
        exposes its keys as attributes.
    """

    def __init__(self, **kwargs):
        dict.__init__(self, kwargs)
        self.__dict__ = self

CKPT = Bunch()

CKPT.MAGIC = b'RPUVAECK'
CKPT.VERSION = 1

#
# Tag kinds
#
CKPT.KIND_VERSION       = 1
CKPT.KIND_ARCHITECTURE  = 2
CKPT.KIND_N_ARRAYS      = 3
CKPT.KIND_ARRAY         = 10
CKPT.KIND_ADAM_CONSTS   = 20
CKPT.KIND_ADAM_T        = 21
CKPT.KIND_ADAM_M        = 22
CKPT.KIND_ADAM_V        = 23
CKPT.KIND_HYPER         = 30
CKPT.KIND_META          = 31
CKPT.KIND_END           = 999

#
# Data types
#
CKPT.TYPE_INT           = 3
CKPT.TYPE_DOUBLE        = 5
CKPT.TYPE_STRING        = 10
CKPT.TYPE_MATRIX        = 1 << 30
CKPT.TYPE_MATRIX_DOUBLE = CKPT.TYPE_DOUBLE | CKPT.TYPE_MATRIX
