#pragma once

#include "hsc/binary_io.hpp"
#include "hsc/compressor.hpp"
#include "hsc/descriptor.hpp"
#include "hsc/error.hpp"
#include "hsc/geometry.hpp"
#include "hsc/harness.hpp"
#include "hsc/matcher.hpp"
#include "hsc/p3p.hpp"
#include "hsc/random.hpp"
#include "hsc/ransac.hpp"
#include "hsc/scene_io.hpp"
#include "hsc/scene_model.hpp"
#include "hsc/synthetic.hpp"
#include "hsc/vocabulary.hpp"
