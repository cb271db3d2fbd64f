"""Diagonal-Gaussian encoder, Bernoulli decoder and their parameters"""

# Authors: rpuvae developers
#
# License: BSD (3-clause)

import copy as cp

import numpy as np
from scipy.special import expit

from .layers import Dense, Conv, ConvTranspose, Network
from ..utils import check_random_state

LOG_VAR_MIN = -20.
LOG_VAR_MAX = 20.
ARCHITECTURES = ('mlp', 'conv')
ENCODER_CHANNELS = (32, 32, 64, 64)
DECODER_CHANNELS = (64, 64, 64)


class VaeParams(object):
    """Weights of a VAE with a fixed architecture

    Parameters
    ----------
    encoder : Network
        Maps images to 2 * latent_dim outputs (means, then log variances).
    decoder : Network
        Maps latent codes to one Bernoulli logit per pixel.
    image_shape : tuple (height, width)
        Shape of the images.
    latent_dim : int
        Number of latent dimensions.
    architecture : 'mlp' | 'conv'
        Name of the architecture.
    hidden : tuple of int
        Hidden layer sizes of the MLP encoder (decoder mirrors them).
    """
    def __init__(self, encoder, decoder, image_shape, latent_dim,
                 architecture='mlp', hidden=(256, 128)):
        self.encoder = encoder
        self.decoder = decoder
        self.image_shape = tuple(int(s) for s in image_shape)
        self.latent_dim = int(latent_dim)
        self.architecture = architecture
        self.hidden = tuple(int(h) for h in hidden)

    @property
    def n_pixels(self):
        return int(np.prod(self.image_shape))

    @property
    def layers(self):
        return self.encoder.layers + self.decoder.layers

    def arrays(self):
        """All weight and bias arrays, encoder first"""
        return self.encoder.arrays() + self.decoder.arrays()

    def set_arrays(self, arrays):
        arrays = list(arrays)
        if len(arrays) != 2 * len(self.layers):
            raise ValueError('Expected %d arrays, got %d'
                             % (2 * len(self.layers), len(arrays)))
        for k, layer in enumerate(self.layers):
            W, b = arrays[2 * k], arrays[2 * k + 1]
            if W.shape != layer.W.shape or b.shape != layer.b.shape:
                raise ValueError('Array shapes do not match layer %d' % k)
            layer.W, layer.b = W, b

    def copy(self):
        return cp.deepcopy(self)

    def zeros_like(self):
        out = self.copy()
        out.set_arrays([np.zeros_like(a) for a in self.arrays()])
        return out

    def is_finite(self):
        return all(np.all(np.isfinite(a)) for a in self.arrays())

    def architecture_info(self):
        return dict(architecture=self.architecture,
                    image_shape=list(self.image_shape),
                    latent_dim=self.latent_dim, hidden=list(self.hidden))

    def __repr__(self):
        n_params = sum(a.size for a in self.arrays())
        return ('<VaeParams %s, %s -> %d latents, %d parameters>'
                % (self.architecture, self.image_shape, self.latent_dim,
                   n_params))


def _mlp_networks(image_shape, latent_dim, hidden):
    enc, shape = list(), tuple(image_shape)
    for h in hidden:
        enc.append(Dense(shape, h))
        shape = (h,)
    enc.append(Dense(shape, 2 * latent_dim))
    dec, shape = list(), (latent_dim,)
    for h in hidden[::-1]:
        dec.append(Dense(shape, h))
        shape = (h,)
    dec.append(Dense(shape, int(np.prod(image_shape))))
    return Network(enc), Network(dec)


def _conv_networks(image_shape, latent_dim):
    height, width = image_shape
    n_conv = int(np.log2(min(height, width) / 4.))
    if (height != width or 4 * 2 ** n_conv != height or n_conv < 1 or
            n_conv > len(ENCODER_CHANNELS)):
        raise ValueError('The conv architecture needs square images with '
                         'side 4 * 2 ** k, 1 <= k <= %d (got %s)'
                         % (len(ENCODER_CHANNELS), image_shape))
    enc, shape = list(), (1, height, width)
    for channels in ENCODER_CHANNELS[:n_conv]:
        layer = Conv(shape, channels)
        enc.append(layer)
        shape = layer.out_shape
    enc.append(Dense(shape, 256))
    enc.append(Dense((256,), 2 * latent_dim))

    dec = [Dense((latent_dim,), 256), Dense((256,), 64 * 4 * 4)]
    shape = (64, 4, 4)
    channels = list(DECODER_CHANNELS[:n_conv - 1]) + [1]
    for c in channels:
        layer = ConvTranspose(shape, c)
        dec.append(layer)
        shape = layer.out_shape
    return Network(enc), Network(dec)


def build_vae(image_shape, latent_dim=10, hidden=(256, 128),
              architecture='mlp', init='uniform', random_state=None):
    """Create the parameters of a VAE

    Parameters
    ----------
    image_shape : tuple (height, width)
        Shape of the input images.
    latent_dim : int
        Number of latent dimensions.
    hidden : tuple of int
        Hidden layer sizes of the MLP architecture (ignored by 'conv').
    architecture : 'mlp' | 'conv'
        'mlp' is input -> hidden -> 2 * latent_dim with a mirrored decoder,
        'conv' is the strided 4x4 convolution stack.
    init : 'uniform' | 'zeros'
        'uniform' draws weights from U(-1 / sqrt(fan_in), 1 / sqrt(fan_in))
        with zero biases, 'zeros' sets everything to 0.
    random_state : None | int | np.random.RandomState
        To specify the random generator state.

    Returns
    -------
    params : VaeParams
        The parameters.
    """
    if latent_dim < 1:
        raise ValueError('latent_dim must be positive (got %s)' % latent_dim)
    if architecture == 'mlp':
        encoder, decoder = _mlp_networks(image_shape, latent_dim, hidden)
    elif architecture == 'conv':
        encoder, decoder = _conv_networks(image_shape, latent_dim)
    else:
        raise ValueError('architecture must be one of %s (got %r)'
                         % (ARCHITECTURES, architecture))
    params = VaeParams(encoder, decoder, image_shape, latent_dim,
                       architecture, hidden)
    if init == 'uniform':
        rng = check_random_state(random_state)
        for layer in params.layers:
            bound = 1. / np.sqrt(layer.fan_in)
            layer.W = rng.uniform(-bound, bound, size=layer.W.shape)
    elif init != 'zeros':
        raise ValueError("init must be 'uniform' or 'zeros' (got %r)" % init)
    return params


def _check_images(params, images):
    images = np.asarray(images, dtype=np.float64)
    flat = images.ndim == 2 and images.shape[1] == params.n_pixels
    if not flat and images.shape[1:] != params.image_shape:
        raise ValueError('invalid input: images of shape %s do not match '
                         'the model (%s)' % (images.shape[1:],
                                             params.image_shape))
    if len(images) == 0:
        raise ValueError('invalid input: empty batch')
    return images.reshape(len(images), params.n_pixels)


def _encode(params, x):
    out, caches = params.encoder.forward(x)
    L = params.latent_dim
    return out[:, :L], out[:, L:], caches


def encode(params, images):
    """Posterior means and log variances of a batch

    Parameters
    ----------
    params : VaeParams
        The model.
    images : array, shape (n, height, width) or (n, height * width)
        The batch.

    Returns
    -------
    mu : array, shape (n, latent_dim)
        The posterior means.
    log_var : array, shape (n, latent_dim)
        The posterior log variances, clipped to [-20, 20].
    """
    x = _check_images(params, images)
    mu, log_var, _ = _encode(params, x)
    return mu, np.clip(log_var, LOG_VAR_MIN, LOG_VAR_MAX)


def _std(log_var):
    """Standard deviation; exactly 0 at the lower log variance bound"""
    return np.where(log_var > LOG_VAR_MIN, np.exp(0.5 * log_var), 0.)


def reparameterize(mu, log_var, random_state=None, eps=None):
    """Draw z = mu + exp(log_var / 2) * eps with eps ~ N(0, I)

    Parameters
    ----------
    mu : array, shape (n, latent_dim)
        Means.
    log_var : array, shape (n, latent_dim)
        Log variances. Values are clipped to [-20, 20]; at -20 the draw is
        exactly mu.
    random_state : None | int | np.random.RandomState
        The generator eps is drawn from.
    eps : array | None
        Use this noise instead of drawing it.

    Returns
    -------
    z : array, shape (n, latent_dim)
        The draw.
    """
    mu = np.asarray(mu, dtype=np.float64)
    log_var = np.clip(np.asarray(log_var, dtype=np.float64), LOG_VAR_MIN,
                      LOG_VAR_MAX)
    if eps is None:
        eps = check_random_state(random_state).randn(*mu.shape)
    return mu + _std(log_var) * eps


def decode(params, z):
    """Bernoulli logits of every pixel, shape (n, height * width)"""
    z = np.atleast_2d(np.asarray(z, dtype=np.float64))
    if z.shape[1] != params.latent_dim or len(z) == 0:
        raise ValueError('invalid input: codes of shape %s do not match '
                         'latent_dim=%d' % (z.shape, params.latent_dim))
    logits, _ = params.decoder.forward(z)
    return logits


def reconstruct(params, images):
    """Bernoulli means of the decoded posterior means"""
    mu, _ = encode(params, images)
    return expit(decode(params, mu)).reshape((len(mu),) + params.image_shape)


def encode_means(params, images, batch_size=1024):
    """Posterior means of many images, computed in chunks"""
    images = np.asarray(images)
    out = [encode(params, images[k:k + batch_size])[0]
           for k in range(0, len(images), batch_size)]
    return np.concatenate(out, axis=0)


def kl_per_dim(mu, log_var):
    """Closed-form KL(N(mu, exp(log_var)) || N(0, 1)) per entry"""
    return 0.5 * (mu ** 2 + np.exp(log_var) - log_var - 1.)


def latent_stats(params, view, sample_budget=None, random_state=0,
                 batch_size=1024):
    """Mean KL to the unit Gaussian prior of every latent dimension

    Parameters
    ----------
    params : VaeParams
        The model.
    view : DatasetView | FactorizedDataset | array
        The data (anything with an ``images`` attribute, or the images).
    sample_budget : int | None
        Number of samples drawn without replacement from the view. None
        uses all of them.
    random_state : None | int | np.random.RandomState
        Generator for the sample selection.

    Returns
    -------
    stats : array, shape (latent_dim,)
        Nonnegative mean KL per latent dimension.
    """
    images = getattr(view, 'images', view)
    n = len(images)
    if sample_budget is not None and sample_budget < n:
        rng = check_random_state(random_state)
        images = images[np.sort(rng.choice(n, sample_budget, replace=False))]
    elif sample_budget is not None and sample_budget > n:
        raise ValueError('sample_budget (%d) exceeds the view size (%d)'
                         % (sample_budget, n))
    total = np.zeros(params.latent_dim)
    for k in range(0, len(images), batch_size):
        mu, log_var = encode(params, images[k:k + batch_size])
        total += kl_per_dim(mu, log_var).sum(axis=0)
    return np.maximum(total / len(images), 0.)


def active_latents(stats, threshold):
    """Indices of latents whose mean KL is strictly above threshold"""
    if threshold <= 0:
        raise ValueError('threshold must be positive (got %s)' % threshold)
    return np.where(np.asarray(stats) > threshold)[0]


def traverse(params, base_image, latent_index, span, steps):
    """Decode a sweep of one latent around the code of an image

    Parameters
    ----------
    params : VaeParams
        The model.
    base_image : array, shape (height, width)
        The image whose posterior mean is the centre of the sweep.
    latent_index : int
        The latent dimension to sweep.
    span : float
        The sweep covers [mu_j - span, mu_j + span].
    steps : int
        Number of uniformly spaced points (>= 2).

    Returns
    -------
    strip : array, shape (steps, height, width)
        Decoded Bernoulli means.
    """
    if steps < 2:
        raise ValueError('invalid input: steps must be >= 2 (got %s)' % steps)
    if not 0 <= latent_index < params.latent_dim:
        raise ValueError('invalid input: latent index %s not in [0, %d)'
                         % (latent_index, params.latent_dim))
    mu, _ = encode(params, np.asarray(base_image)[None])
    z = np.repeat(mu, steps, axis=0)
    z[:, latent_index] = mu[0, latent_index] + np.linspace(-span, span, steps)
    return expit(decode(params, z)).reshape((steps,) + params.image_shape)
