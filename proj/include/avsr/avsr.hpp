#pragma once

#include "avsr/audio.hpp"
#include "avsr/ctc.hpp"
#include "avsr/decoder.hpp"
#include "avsr/demo.hpp"
#include "avsr/error.hpp"
#include "avsr/fusion.hpp"
#include "avsr/logmath.hpp"
#include "avsr/manifest.hpp"
#include "avsr/matrix.hpp"
#include "avsr/posterior_grid.hpp"
#include "avsr/scorer.hpp"
#include "avsr/visual.hpp"
#include "avsr/vocab.hpp"
#include "avsr/wer.hpp"
