#ifndef DEGCRAFT_DEGCRAFT_HPP
#define DEGCRAFT_DEGCRAFT_HPP

#include "degcraft/binspace.hpp"
#include "degcraft/crafting.hpp"
#include "degcraft/degrade.hpp"
#include "degcraft/errors.hpp"
#include "degcraft/featext.hpp"
#include "degcraft/gaussdist.hpp"
#include "degcraft/harness.hpp"
#include "degcraft/image.hpp"
#include "degcraft/image_io.hpp"
#include "degcraft/rng.hpp"
#include "degcraft/synthkit.hpp"
#include "degcraft/weights_file.hpp"

#endif
