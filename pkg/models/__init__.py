from models.waveform import ChirpParams, ChirpBank
from models.frame import FrameLayout, Packet, WaveformMetadata
from models.channel import ChannelModel, NoiseSpec
from models.detection import ChannelEstimate, DetectionResult
from models.sweep import SweepConfig, BerPoint, BerReport
