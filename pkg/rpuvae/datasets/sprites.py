"""Procedurally rendered factorized sprite datasets"""

# Authors: rpuvae developers
#
# License: BSD (3-clause)

import json
import os.path as op

import numpy as np

import logging
logger = logging.getLogger('rpuvae')

from ..utils import verbose

KNOWN_FACTORS = ('shape', 'scale', 'rotation', 'x', 'y')
SHAPE_NAMES = ('square', 'plus', 'diamond')
RENDERERS = ('square-sprite',)
DEFAULT_SIDE = 3
# plus and diamond masks coincide at side 3
SHAPED_SIDE = 5
MAX_BYTES = 2 ** 32


class FactorSpec(object):
    """Layout of the ground-truth factors of a sprite dataset

    Parameters
    ----------
    factors : list of (str, int)
        Ordered (name, cardinality) pairs. The last factor varies fastest
        in generation order. Names are taken from 'shape', 'scale',
        'rotation', 'x' and 'y'.
    image_height : int
        Height of the images in pixels.
    image_width : int
        Width of the images in pixels.
    renderer : str
        Only 'square-sprite' is available.

    Attributes
    ----------
    names : list of str
        The factor names.
    cardinalities : array of int
        The number of levels of each factor.
    n_samples : int
        Product of the cardinalities.
    """
    def __init__(self, factors, image_height=16, image_width=16,
                 renderer='square-sprite'):
        factors = [(str(name), int(card)) for name, card in factors]
        if len(factors) == 0:
            raise ValueError('invalid spec: at least one factor is needed')
        names = [name for name, _ in factors]
        if len(set(names)) != len(names):
            raise ValueError('invalid spec: factor names must be unique '
                             '(got %s)' % names)
        for name, card in factors:
            if card < 1:
                raise ValueError('invalid spec: factor %r has cardinality '
                                 '%d' % (name, card))
            if name not in KNOWN_FACTORS:
                raise ValueError('invalid spec: unknown factor %r, use one '
                                 'of %s' % (name, KNOWN_FACTORS))
        if renderer not in RENDERERS:
            raise ValueError('invalid spec: unknown renderer %r' % renderer)
        self.factors = factors
        self.image_height = int(image_height)
        self.image_width = int(image_width)
        self.renderer = renderer

    @property
    def names(self):
        return [name for name, _ in self.factors]

    @property
    def cardinalities(self):
        return np.array([card for _, card in self.factors], dtype=np.int64)

    @property
    def n_samples(self):
        return int(np.prod(self.cardinalities))

    @property
    def image_shape(self):
        return (self.image_height, self.image_width)

    def cardinality(self, name, default=1):
        return dict(self.factors).get(name, default)

    def to_dict(self):
        return dict(factors=[list(f) for f in self.factors],
                    image_height=self.image_height,
                    image_width=self.image_width, renderer=self.renderer)

    @classmethod
    def from_dict(cls, d):
        return cls([tuple(f) for f in d['factors']], d['image_height'],
                   d['image_width'], d.get('renderer', 'square-sprite'))

    def __eq__(self, other):
        return (isinstance(other, FactorSpec) and
                self.to_dict() == other.to_dict())

    def __repr__(self):
        s = ', '.join('%s:%d' % f for f in self.factors)
        return '<FactorSpec {%s}, %dx%d>' % (s, self.image_height,
                                             self.image_width)


def desk_spec():
    """The default desk-scale layout {scale:3, x:8, y:8} at 16x16"""
    return FactorSpec([('scale', 3), ('x', 8), ('y', 8)], 16, 16)


def dsprites_spec():
    """The full dsprites factor layout at 64x64 (737,280 samples)"""
    return FactorSpec([('shape', 3), ('scale', 6), ('rotation', 40),
                       ('x', 32), ('y', 32)], 64, 64)


###############################################################################
# Rendering

def _sprite_sides(spec):
    """Odd sprite sides, one per scale level"""
    first = SHAPED_SIDE if spec.cardinality('shape', 0) > 1 else DEFAULT_SIDE
    n_scale = spec.cardinality('scale', 0)
    if n_scale == 0:
        return np.array([first])
    return first + 2 * np.arange(n_scale)


def _sprite_extent(spec):
    """Largest distance (in pixels) from a sprite centre to its border"""
    half = (_sprite_sides(spec).max() - 1) // 2
    if spec.cardinality('rotation') > 1:
        return int(np.ceil(half * np.sqrt(2)))
    return int(half)


def _position_grid(n_levels, size, extent, name):
    lo, hi = extent, size - 1 - extent
    if hi < lo:
        raise ValueError('invalid spec: sprites of half-extent %d do not fit '
                         'in %d pixels along %s' % (extent, size, name))
    if n_levels == 1:
        return np.array([(lo + hi) // 2])
    centres = np.round(np.linspace(lo, hi, n_levels)).astype(np.int64)
    if np.any(np.diff(centres) <= 0):
        raise ValueError('invalid spec: %d levels of %s do not fit on the '
                         '%d available pixel positions'
                         % (n_levels, name, hi - lo + 1))
    return centres


def _sprite_mask(shape_index, side, angle, extent):
    """Binary mask of one sprite on a (2 * extent + 1) ** 2 patch"""
    offsets = np.arange(-extent, extent + 1, dtype=np.float64)
    dy, dx = np.meshgrid(offsets, offsets, indexing='ij')
    if angle != 0.:
        c, s = np.cos(angle), np.sin(angle)
        dx, dy = c * dx + s * dy, -s * dx + c * dy
    half = (side - 1) / 2.
    # small slack so that unrotated masks are exact integer squares
    half += 1e-9
    u, v = np.abs(dx), np.abs(dy)
    if SHAPE_NAMES[shape_index] == 'square':
        mask = np.maximum(u, v) <= half
    elif SHAPE_NAMES[shape_index] == 'plus':
        arm = max(half / 3., 0.5)
        mask = (np.maximum(u, v) <= half) & (np.minimum(u, v) <= arm)
    else:
        mask = (u + v) <= half
    return mask


class FactorizedDataset(object):
    """Images with a complete ground-truth factor table

    Parameters
    ----------
    spec : FactorSpec
        The factor layout.
    images : array, shape (n_samples, height, width)
        Binary pixel values (0 or 1).
    factor_table : array of int, shape (n_samples, n_factors)
        The factor indices of every image.

    Notes
    -----
    Images are stored as uint8, one byte per pixel. The models convert
    the batches they are given to float64.

    Instances are read-only after construction: the arrays are flagged
    non-writeable so that views and worker processes can share them.
    """
    def __init__(self, spec, images, factor_table):
        images = np.asarray(images)
        if images.dtype != np.uint8:
            if not np.all((images == 0) | (images == 1)):
                raise ValueError('invalid input: sprite images must be '
                                 'binary')
            images = images.astype(np.uint8)
        elif images.size > 0 and images.max() > 1:
            raise ValueError('invalid input: sprite images must be binary')
        factor_table = np.asarray(factor_table, dtype=np.int64)
        if images.shape[0] != factor_table.shape[0]:
            raise ValueError('one factor row per image is needed (got %d '
                             'images and %d rows)'
                             % (images.shape[0], factor_table.shape[0]))
        if images.shape[1:] != spec.image_shape:
            raise ValueError('images have shape %s, spec says %s'
                             % (images.shape[1:], spec.image_shape))
        images.flags.writeable = False
        factor_table.flags.writeable = False
        self.spec = spec
        self.images = images
        self.factor_table = factor_table

    def __len__(self):
        return len(self.images)

    def __repr__(self):
        return '<FactorizedDataset %s, %d samples>' % (self.spec, len(self))

    @property
    def indices(self):
        return np.arange(len(self))

    @property
    def root(self):
        return self

    @property
    def factors(self):
        return self.factor_table

    def image(self, k):
        return self.images[k]

    def view(self):
        """A DatasetView over every sample"""
        return DatasetView(self, np.arange(len(self)))

    def save(self, fname):
        """Save images, factor table and spec in a .npz file"""
        np.savez_compressed(fname, images=self.images,
                            factor_table=self.factor_table,
                            spec=json.dumps(self.spec.to_dict(),
                                            sort_keys=True))


def read_dataset(fname):
    """Read a dataset written by FactorizedDataset.save

    Parameters
    ----------
    fname : str
        The .npz file name.

    Returns
    -------
    dataset : FactorizedDataset
        The dataset.
    """
    if not op.isfile(fname):
        raise ValueError('No dataset file found at %s' % fname)
    with np.load(fname) as npz:
        spec = FactorSpec.from_dict(json.loads(str(npz['spec'])))
        return FactorizedDataset(spec, npz['images'],
                                 npz['factor_table'])


class DatasetView(object):
    """Read-only selection of samples of a FactorizedDataset

    Parameters
    ----------
    parent : FactorizedDataset
        The dataset owning the images.
    indices : array of int
        Global sample indices, sorted and unique.
    """
    def __init__(self, parent, indices):
        self.parent = parent
        self.indices = np.asarray(indices, dtype=np.int64)
        self.indices.flags.writeable = False

    def __len__(self):
        return len(self.indices)

    def __repr__(self):
        return '<DatasetView %d of %d samples>' % (len(self),
                                                   len(self.parent))

    @property
    def root(self):
        return self.parent

    @property
    def images(self):
        if len(self.indices) == len(self.parent):
            return self.parent.images
        return self.parent.images[self.indices]

    @property
    def factors(self):
        return self.parent.factor_table[self.indices]

    def image(self, k):
        """Image at position k of the view"""
        return self.parent.images[self.indices[k]]

    def __iter__(self):
        for idx in self.indices:
            yield self.parent.images[idx]


def check_spec(spec, max_bytes=MAX_BYTES):
    """Check that a FactorSpec can be rendered, without rendering it

    Parameters
    ----------
    spec : FactorSpec
        The factor layout.
    max_bytes : int
        Memory budget for the images (one byte per pixel).

    Returns
    -------
    n_samples : int
        The number of images the spec renders.
    """
    height, width = spec.image_shape
    if height < 8 or width < 8:
        raise ValueError('invalid spec: images must be at least 8x8 (got '
                         '%dx%d)' % (height, width))
    n_samples = spec.n_samples
    if n_samples * height * width > max_bytes:
        raise ValueError('invalid spec: %d samples of %dx%d exceed the memory '
                         'budget of %d bytes'
                         % (n_samples, height, width, max_bytes))
    if spec.cardinality('shape') > len(SHAPE_NAMES):
        raise ValueError('invalid spec: at most %d shapes are available'
                         % len(SHAPE_NAMES))
    extent = _sprite_extent(spec)
    _position_grid(spec.cardinality('x'), width, extent, 'x')
    _position_grid(spec.cardinality('y'), height, extent, 'y')
    return n_samples


@verbose
def generate(spec, max_bytes=MAX_BYTES, verbose=None):
    """Render the complete Cartesian-product dataset of a FactorSpec

    Parameters
    ----------
    spec : FactorSpec
        The factor layout.
    max_bytes : int
        Memory budget for the rendered images.
    verbose : bool, str, int, or None
        If not None, override default verbose level (see rpuvae.verbose).

    Returns
    -------
    dataset : FactorizedDataset
        One image per factor combination, in mixed-radix order (last factor
        fastest). Rendering is deterministic.
    """
    height, width = spec.image_shape
    n_samples = check_spec(spec, max_bytes)
    sides = _sprite_sides(spec)
    extent = _sprite_extent(spec)
    xs = _position_grid(spec.cardinality('x'), width, extent, 'x')
    ys = _position_grid(spec.cardinality('y'), height, extent, 'y')
    n_rot = spec.cardinality('rotation')
    angles = np.arange(n_rot) * (np.pi / 2.) / n_rot

    factor_table = np.array(np.unravel_index(np.arange(n_samples),
                                             spec.cardinalities)).T
    names = spec.names
    logger.info('Rendering %d images of %dx%d...' % (n_samples, height,
                                                     width))

    images = np.zeros((n_samples, height, width), dtype=np.uint8)
    masks = dict()
    col = dict((name, names.index(name)) for name in names)
    for i, row in enumerate(factor_table):
        shape = row[col['shape']] if 'shape' in col else 0
        scale = row[col['scale']] if 'scale' in col else 0
        rot = row[col['rotation']] if 'rotation' in col else 0
        key = (shape, scale, rot)
        if key not in masks:
            masks[key] = _sprite_mask(shape, sides[scale], angles[rot],
                                      extent)
        cx = xs[row[col['x']]] if 'x' in col else xs[0]
        cy = ys[row[col['y']]] if 'y' in col else ys[0]
        images[i, cy - extent:cy + extent + 1,
               cx - extent:cx + extent + 1] = masks[key]

    return FactorizedDataset(spec, images, factor_table)


def _as_view(dataset_or_view):
    if isinstance(dataset_or_view, DatasetView):
        return dataset_or_view
    return dataset_or_view.view()


def subset(dataset_or_view, indices):
    """Restrict a dataset or view to a set of global sample indices

    Parameters
    ----------
    dataset_or_view : FactorizedDataset | DatasetView
        The dataset or view to select from.
    indices : array-like of int
        Global sample indices. For a view they must all belong to the view.

    Returns
    -------
    view : DatasetView
        A view sharing the parent's storage, iterating in sorted order.
    """
    source = _as_view(dataset_or_view)
    indices = np.unique(np.asarray(indices, dtype=np.int64))
    if indices.size == 0:
        raise ValueError('empty view: the index set is empty')
    if indices[0] < 0 or indices[-1] >= len(source.parent):
        raise ValueError('invalid index: indices must lie in [0, %d)'
                         % len(source.parent))
    if not np.all(np.isin(indices, source.indices, assume_unique=True)):
        raise ValueError('invalid index: some indices are not part of the '
                         'view')
    return DatasetView(source.parent, indices)


def factor_lookup(dataset, sample_index):
    """Mixed-radix decomposition of a sample index into factor indices

    Parameters
    ----------
    dataset : FactorizedDataset | FactorSpec
        The dataset (or its spec).
    sample_index : int
        The sample index.

    Returns
    -------
    factors : array of int
        The factor vector of that sample.
    """
    spec = dataset if isinstance(dataset, FactorSpec) else dataset.spec
    n_samples = spec.n_samples
    if not 0 <= sample_index < n_samples:
        raise ValueError('invalid index: %s not in [0, %d)'
                         % (sample_index, n_samples))
    return np.array(np.unravel_index(int(sample_index), spec.cardinalities))


def factor_index(dataset, factors):
    """Inverse of factor_lookup"""
    spec = dataset if isinstance(dataset, FactorSpec) else dataset.spec
    factors = np.asarray(factors)
    if np.any(factors < 0) or np.any(factors >= spec.cardinalities):
        raise ValueError('invalid index: factor vector %s out of range'
                         % factors)
    return int(np.ravel_multi_index(tuple(factors), spec.cardinalities))


def write_pgm(fname, image):
    """Write a 2D array with values in [0, 1] as a binary (P5) graymap"""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ValueError('A graymap needs a 2D image (got shape %s)'
                         % (image.shape,))
    data = np.round(np.clip(image, 0., 1.) * 255).astype(np.uint8)
    header = ('P5\n%d %d\n255\n' % (image.shape[1], image.shape[0]))
    with open(fname, 'wb') as fid:
        fid.write(header.encode('ascii'))
        fid.write(data.tobytes())


def read_pgm(fname):
    """Read a binary (P5) graymap written by write_pgm"""
    with open(fname, 'rb') as fid:
        tokens = []
        while len(tokens) < 4:
            line = fid.readline()
            if not line:
                raise ValueError('%s is not a P5 graymap' % fname)
            tokens.extend(line.split(b'#')[0].split())
        if tokens[0] != b'P5':
            raise ValueError('%s is not a P5 graymap' % fname)
        width, height, maxval = map(int, tokens[1:4])
        data = np.frombuffer(fid.read(width * height), dtype=np.uint8)
    return data.reshape(height, width) / float(maxval)
