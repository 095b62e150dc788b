#pragma once

#include "gvpr/descriptors.hpp"
#include "gvpr/embed.hpp"
#include "gvpr/fov2d.hpp"
#include "gvpr/gcl.hpp"
#include "gvpr/geometry.hpp"
#include "gvpr/relabel.hpp"
#include "gvpr/retrieval.hpp"
#include "gvpr/sampler.hpp"
#include "gvpr/surf3d.hpp"
#include "gvpr/synth.hpp"
