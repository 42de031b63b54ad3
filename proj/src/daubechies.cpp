#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavedet/wavelet.hpp"

namespace wavedet {
namespace {

// Minimum-phase Daubechies scaling filters, sum h = sqrt(2), sum h^2 = 1.
// Obtained by spectral factorisation at 60 significant digits and rounded.

constexpr std::array<double, 2> kDb1 = {
    0.7071067811865475244008,
    0.7071067811865475244008,
};

constexpr std::array<double, 4> kDb2 = {
    0.4829629131445341433749,
    0.8365163037378079055753,
    0.224143868042013381026,
    -0.1294095225512603811744,
};

constexpr std::array<double, 6> kDb3 = {
    0.3326705529500826159985,
    0.8068915093110925764945,
    0.4598775021184915700952,
    -0.1350110200102545886964,
    -0.08544127388202666169282,
    0.03522629188570953660274,
};

constexpr std::array<double, 8> kDb4 = {
    0.2303778133088965008633,
    0.7148465705529156470899,
    0.6308807679298589078817,
    -0.02798376941685985421141,
    -0.1870348117190930840796,
    0.03084138183556076362722,
    0.03288301166688519973541,
    -0.01059740178506903210488,
};

constexpr std::array<double, 10> kDb5 = {
    0.1601023979741929144807,
    0.6038292697971896705401,
    0.7243085284377729277281,
    0.1384281459013207315054,
    -0.2422948870663820318626,
    -0.03224486958463837464848,
    0.07757149384004571352313,
    -0.006241490212798274274191,
    -0.01258075199908199946851,
    0.003335725285473771277998,
};

constexpr std::array<double, 12> kDb6 = {
    0.1115407433501094636213,
    0.4946238903984530856772,
    0.7511339080210953506789,
    0.315250351709197629086,
    -0.2262646939654398200763,
    -0.1297668675672619355623,
    0.09750160558732304910234,
    0.02752286553030572862554,
    -0.03158203931748602956508,
    0.0005538422011614961392519,
    0.004777257510945510639636,
    -0.001077301085308479564853,
};

constexpr std::array<double, 14> kDb7 = {
    0.07785205408500917901996,
    0.396539319481917306539,
    0.7291320908462351199169,
    0.4697822874051931224716,
    -0.1439060039285649754051,
    -0.2240361849938749826381,
    0.07130921926683026475088,
    0.08061260915108307191292,
    -0.03802993693501441357959,
    -0.01657454163066688065411,
    0.01255099855609984061299,
    0.0004295779729213665211321,
    -0.001801640704047490915268,
    0.0003537137999745202484463,
};

constexpr std::array<double, 16> kDb8 = {
    0.05441584224310400995501,
    0.3128715909142999706592,
    0.6756307362972898068078,
    0.5853546836542067127713,
    -0.01582910525634930566738,
    -0.2840155429615469265162,
    0.0004724845739132827703606,
    0.128747426620478458857,
    -0.01736930100180754616962,
    -0.04408825393079475150676,
    0.01398102791739828164872,
    0.008746094047405776716383,
    -0.004870352993451574310422,
    -0.0003917403733769470462981,
    0.0006754494064505693663695,
    -0.0001174767841247695337306,
};

constexpr std::array<double, 18> kDb9 = {
    0.0380779473638783465887,
    0.243834674612590353732,
    0.6048231236901111119031,
    0.6572880780513005380782,
    0.133197385825007576191,
    -0.2932737832791749088064,
    -0.09684078322297646051351,
    0.1485407493381063801351,
    0.03072568147933337921232,
    -0.06763282906132997367564,
    0.0002509471148314519575872,
    0.02236166212367909720537,
    -0.004723204757751397277926,
    -0.004281503682463429834497,
    0.001847646883056226476619,
    0.0002303857635231959672052,
    -0.000251963188942710136975,
    0.00003934732031627159948069,
};

constexpr std::array<double, 20> kDb10 = {
    0.02667005790055555358662,
    0.1881768000776914890209,
    0.5272011889317255864817,
    0.6884590394536035657419,
    0.2811723436605774607487,
    -0.2498464243273153794161,
    -0.1959462743773770435043,
    0.1273693403357932600827,
    0.09305736460357235116035,
    -0.07139414716639708714534,
    -0.02945753682187581285828,
    0.03321267405934100173976,
    0.003606553566956169655423,
    -0.01073317548333057504432,
    0.001395351747052901165789,
    0.001992405295185056117159,
    -0.0006858566949597116265614,
    -0.0001164668551292854509515,
    0.00009358867032006959133405,
    -0.00001326420289452124481244,
};

constexpr std::array<std::span<const double>, 10> kTable = {
    kDb1, kDb2, kDb3, kDb4, kDb5, kDb6, kDb7, kDb8, kDb9, kDb10,
};

}  // namespace

WaveletFilterPair db_filters(int order) {
  if (order < 1 || order > static_cast<int>(kTable.size())) {
    throw std::invalid_argument("unsupported Daubechies order " + std::to_string(order) +
                                " (expected 1..10)");
  }
  const auto taps = kTable[static_cast<std::size_t>(order - 1)];
  const std::string family = order == 1 ? "haar" : "db" + std::to_string(order);
  return WaveletFilterPair(family, std::vector<double>(taps.begin(), taps.end()));
}

}  // namespace wavedet
