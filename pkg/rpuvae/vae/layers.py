"""Layers with hand-written backpropagation

Every layer maps a batch ``x`` of shape (n,) + in_shape to a batch of shape
(n,) + out_shape. ``forward`` returns the output and a cache, ``backward``
turns the gradient of the output into the gradient of the input and of the
layer parameters.
"""

# Authors: rpuvae developers
#
# License: BSD (3-clause)

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class Dense(object):
    """Fully connected layer y = x W + b

    Parameters
    ----------
    in_shape : tuple of int
        Per-sample input shape (flattened before the product).
    n_out : int
        Number of output units.
    """
    kind = 'dense'

    def __init__(self, in_shape, n_out):
        self.in_shape = tuple(in_shape)
        self.n_in = int(np.prod(self.in_shape))
        self.out_shape = (int(n_out),)
        self.W = np.zeros((self.n_in, n_out))
        self.b = np.zeros(n_out)

    @property
    def fan_in(self):
        return self.n_in

    def forward(self, x):
        x = x.reshape(len(x), self.n_in)
        return np.dot(x, self.W) + self.b, x

    def backward(self, dout, cache):
        x = cache
        dW = np.dot(x.T, dout)
        db = dout.sum(axis=0)
        dx = np.dot(dout, self.W.T)
        return dx.reshape((len(dx),) + self.in_shape), dW, db


def _out_size(size, kernel, stride, pad):
    return (size + 2 * pad - kernel) // stride + 1


def _im2col(x, kernel, stride, pad):
    """Patches of x (n, C, H, W) as a (n, Ho, Wo, C * kernel ** 2) array"""
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    windows = sliding_window_view(xp, (kernel, kernel), axis=(2, 3))
    windows = windows[:, :, ::stride, ::stride]
    n, C, Ho, Wo = windows.shape[:4]
    cols = windows.transpose(0, 2, 3, 1, 4, 5)
    return cols.reshape(n, Ho, Wo, C * kernel * kernel)


def _col2im(cols, x_shape, kernel, stride, pad):
    """Adjoint of _im2col: sum patches back into an (n, C, H, W) array"""
    n, C, H, W = x_shape
    Ho, Wo = cols.shape[1:3]
    cols = cols.reshape(n, Ho, Wo, C, kernel, kernel)
    xp = np.zeros((n, C, H + 2 * pad, W + 2 * pad))
    for i in range(kernel):
        for j in range(kernel):
            xp[:, :, i:i + stride * Ho:stride, j:j + stride * Wo:stride] += \
                cols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
    return xp[:, :, pad:pad + H, pad:pad + W]


class Conv(object):
    """2D convolution (kernel 4, stride 2, padding 1 by default)

    Parameters
    ----------
    in_shape : tuple (C, H, W)
        Per-sample input shape.
    n_filters : int
        Number of output channels.
    """
    kind = 'conv'

    def __init__(self, in_shape, n_filters, kernel=4, stride=2, pad=1):
        C, H, W = in_shape
        self.in_shape = tuple(in_shape)
        self.kernel, self.stride, self.pad = kernel, stride, pad
        self.out_shape = (int(n_filters), _out_size(H, kernel, stride, pad),
                          _out_size(W, kernel, stride, pad))
        self.W = np.zeros((n_filters, C * kernel * kernel))
        self.b = np.zeros(n_filters)

    @property
    def fan_in(self):
        return self.W.shape[1]

    def forward(self, x):
        x = x.reshape((len(x),) + self.in_shape)
        cols = _im2col(x, self.kernel, self.stride, self.pad)
        out = np.dot(cols, self.W.T) + self.b
        return out.transpose(0, 3, 1, 2), (x.shape, cols)

    def backward(self, dout, cache):
        x_shape, cols = cache
        n, F, Ho, Wo = dout.shape
        dflat = dout.transpose(0, 2, 3, 1).reshape(-1, F)
        dW = np.dot(dflat.T, cols.reshape(-1, cols.shape[-1]))
        db = dflat.sum(axis=0)
        dcols = np.dot(dflat, self.W).reshape(n, Ho, Wo, -1)
        dx = _col2im(dcols, x_shape, self.kernel, self.stride, self.pad)
        return dx, dW, db


class ConvTranspose(object):
    """Transposed 2D convolution, the adjoint geometry of Conv

    Parameters
    ----------
    in_shape : tuple (F, H, W)
        Per-sample input shape.
    n_channels : int
        Number of output channels.
    """
    kind = 'conv_transpose'

    def __init__(self, in_shape, n_channels, kernel=4, stride=2, pad=1):
        F, H, W = in_shape
        self.in_shape = tuple(in_shape)
        self.kernel, self.stride, self.pad = kernel, stride, pad
        Ho = (H - 1) * stride - 2 * pad + kernel
        Wo = (W - 1) * stride - 2 * pad + kernel
        self.out_shape = (int(n_channels), Ho, Wo)
        self.W = np.zeros((F, n_channels * kernel * kernel))
        self.b = np.zeros(n_channels)

    @property
    def fan_in(self):
        return self.W.shape[0] * self.kernel * self.kernel // self.stride ** 2

    def forward(self, x):
        x = x.reshape((len(x),) + self.in_shape)
        n, F, H, W = x.shape
        xflat = x.transpose(0, 2, 3, 1).reshape(n, H, W, F)
        cols = np.dot(xflat, self.W)
        out = _col2im(cols, (n,) + self.out_shape, self.kernel, self.stride,
                      self.pad)
        return out + self.b[None, :, None, None], xflat

    def backward(self, dout, cache):
        xflat = cache
        n, H, W, F = xflat.shape
        g = _im2col(dout, self.kernel, self.stride, self.pad)
        g = g.reshape(-1, g.shape[-1])
        dW = np.dot(xflat.reshape(-1, F).T, g)
        db = dout.sum(axis=(0, 2, 3))
        dx = np.dot(g, self.W.T).reshape(n, H, W, F).transpose(0, 3, 1, 2)
        return dx, dW, db


LAYER_KINDS = dict((cls.kind, cls) for cls in (Dense, Conv, ConvTranspose))


def relu(x):
    return np.maximum(x, 0.)


class Network(object):
    """Stack of layers with ReLU between consecutive layers

    The last layer has no activation.
    """
    def __init__(self, layers):
        self.layers = list(layers)

    @property
    def in_shape(self):
        return self.layers[0].in_shape

    @property
    def out_shape(self):
        return self.layers[-1].out_shape

    def forward(self, x):
        caches = list()
        h = x
        n_layers = len(self.layers)
        for k, layer in enumerate(self.layers):
            h, cache = layer.forward(h)
            pre = h
            if k < n_layers - 1:
                h = relu(h)
            caches.append((cache, pre))
        return h.reshape(len(x), -1), caches

    def backward(self, dout, caches):
        """Gradients of the inputs and a list of (dW, db) per layer"""
        grads = [None] * len(self.layers)
        n_layers = len(self.layers)
        dh = dout
        for k in range(n_layers - 1, -1, -1):
            layer = self.layers[k]
            cache, pre = caches[k]
            dh = dh.reshape(pre.shape)
            if k < n_layers - 1:
                dh = dh * (pre > 0)
            dh, dW, db = layer.backward(dh, cache)
            grads[k] = (dW, db)
        return dh, grads

    def arrays(self):
        out = list()
        for layer in self.layers:
            out.extend([layer.W, layer.b])
        return out
