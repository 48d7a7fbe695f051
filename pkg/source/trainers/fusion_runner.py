"""Fusion inference: checkpoint loading, single-image fusion and component timings."""
import logging
from dataclasses import dataclass, field
from pathlib import Path

import torch

from entities.checkpoint import Checkpoint
from entities.image import ChannelLayout, Image
from network.fusion_network import FusionNetwork
from outer_resources.checkpoint_files import apply_tensors
from outer_resources.image_files import load_image
from text_priors.text_prior import TextPrior
from utils.exceptions import ConfigError, TextPriorError
from utils.timing import measure_ms

logger = logging.getLogger(__name__)

TEXT_PRIOR_METADATA_KEY = "text_prior"


def network_from_checkpoint(checkpoint: Checkpoint) -> FusionNetwork:
    """Rebuild a network in eval mode from a checkpoint's config and weights."""
    network = FusionNetwork(checkpoint.net_config)
    apply_tensors(network, checkpoint.network_tensors())
    return network.eval()


def check_text_prior(checkpoint: Checkpoint, text_prior: TextPrior) -> None:
    """Refuse to condition a text-guided network on embeddings other than the ones it was trained with."""
    if not checkpoint.net_config.with_text:
        return
    recorded = checkpoint.metadata.get(TEXT_PRIOR_METADATA_KEY)
    if recorded is None:
        logger.warning(f"{checkpoint.stage} checkpoint does not record its text prior; using {text_prior.signature}")
        return
    if recorded != text_prior.signature:
        raise TextPriorError(f"{checkpoint.stage} checkpoint was trained with text prior {recorded}, "
                             f"configured prior is {text_prior.signature}")


def fuse_image(
        network: FusionNetwork,
        vis: Image,
        ir: Image,
        category: str | None = None,
        text_prior: TextPrior | None = None,
) -> Image:
    """Fuse one pair; text-guided networks need a category, text-free ones ignore it."""
    text = None
    if network.config.with_text:
        if not category:
            raise ConfigError("A text-guided network needs a degradation category")
        text_prior = text_prior or TextPrior(TextPrior.Config(), network.config.text_dim)
        text = text_prior.embed(category).to_tensor()
    network.eval()
    with torch.inference_mode():
        fused, _ = network(vis.to_tensor(), ir.to_tensor(), text)
    return Image.from_tensor(fused)


@dataclass
class ComponentTimings:
    """Millisecond samples per inference component."""

    data_load: list[float] = field(default_factory=list)
    text: list[float] = field(default_factory=list)
    fusion: list[float] = field(default_factory=list)


class FusionRunner:
    """Timed inference with one network."""

    @dataclass
    class Context:
        """context."""

        text_prior: TextPrior | None = None

    def __init__(self, name: str, checkpoint: Checkpoint, context: Context) -> None:
        """init."""
        self.name = name
        self.context = context
        self.network = network_from_checkpoint(checkpoint)
        self.timings = ComponentTimings()
        if self.network.config.with_text and context.text_prior is None:
            self.context.text_prior = TextPrior(TextPrior.Config(), self.network.config.text_dim)
        check_text_prior(checkpoint, self.context.text_prior)
        logger.info(f"{type(self).__name__} {name} inited")

    @property
    def uses_text(self) -> bool:
        """Whether the network is text-guided."""
        return self.network.config.with_text

    def load_pair(self, vis_path: str | Path, ir_path: str | Path) -> tuple[Image, Image]:
        """Read a pair, timing it."""
        sample: dict[str, float] = {}
        with measure_ms(sample, "data_load"):
            vis = load_image(vis_path, ChannelLayout.RGB3)
            ir = load_image(ir_path, ChannelLayout.GRAY1)
        self.timings.data_load.append(sample["data_load"])
        return vis, ir

    def fuse(self, vis: Image, ir: Image, category: str | None = None, record: bool = True) -> Image:
        """Fuse a pair, timing the text lookup and the forward pass."""
        sample: dict[str, float] = {}
        text = None
        if self.uses_text:
            if not category:
                raise ConfigError(f"{self.name} is text-guided and needs a degradation category")
            with measure_ms(sample, "text"):
                text = self.context.text_prior.embed(category).to_tensor()
        vis_tensor = vis.to_tensor()
        ir_tensor = ir.to_tensor()
        with measure_ms(sample, "fusion"), torch.inference_mode():
            fused, _ = self.network(vis_tensor, ir_tensor, text)
        if record:
            self.timings.fusion.append(sample["fusion"])
            if "text" in sample:
                self.timings.text.append(sample["text"])
        return Image.from_tensor(fused)
