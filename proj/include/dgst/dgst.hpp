#pragma once

#include "dgst/error.hpp"
#include "dgst/evalproto.hpp"
#include "dgst/extraction.hpp"
#include "dgst/figures.hpp"
#include "dgst/formats.hpp"
#include "dgst/geometry.hpp"
#include "dgst/labelgen.hpp"
#include "dgst/losses.hpp"
#include "dgst/parallel.hpp"
#include "dgst/synth.hpp"
