"""Deterministic, non-neural machinery for semantic image extrapolation:
panoptic estimation from label maps, instance-aware context features,
patch sampling, loss kernels, co-occurrence metrics and zoom scheduling."""

from .errors import ContractViolation, FormatError, InvalidInputError
from .gridcore import CropRegion, center_crop, crop, resample, zero_pad
from .panopticlab import CenterOffsetField, InstanceCenter, PanopticGrid

__all__ = [
    "CenterOffsetField",
    "ContractViolation",
    "CropRegion",
    "FormatError",
    "InstanceCenter",
    "InvalidInputError",
    "PanopticGrid",
    "center_crop",
    "crop",
    "resample",
    "zero_pad",
]
