"""beta-TCVAE with analytic gradients"""

from .model import VaeParams, build_vae, encode, decode, reparameterize, \
                   reconstruct, encode_means, kl_per_dim, latent_stats, \
                   active_latents, traverse
from .loss import LossBreakdown, tcvae_loss, loss_gradient, \
                  loss_and_gradient
from .optim import Hyper, Adam, DivergedError, train_epoch
