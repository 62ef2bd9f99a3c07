#pragma once

#include "uvrppg/commands.hpp"
#include "uvrppg/core.hpp"
#include "uvrppg/dataset_io.hpp"
#include "uvrppg/frame_ops.hpp"
#include "uvrppg/image.hpp"
#include "uvrppg/mesh_geometry.hpp"
#include "uvrppg/pulse_eval.hpp"
#include "uvrppg/rppg_extract.hpp"
#include "uvrppg/synth_video.hpp"
#include "uvrppg/uv_mapping.hpp"
