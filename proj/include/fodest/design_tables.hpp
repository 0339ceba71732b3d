#pragma once

// Shipped gradient designs: electrostatically optimized upper-hemisphere
// axes for the two table sizes that match no icosphere vertex/face count.
// Worst per-block condition number of the deconvolution covariance:
// n=41 (l_max=6): 1.10;  n=91 (l_max=10): 1.12.

namespace fod::detail {

inline constexpr double kDesign41[41][3] = {
    {-0.99410534078846369, 0.1083952217205038, 0.0022466250277806982},
    {0.62604130825285764, -0.77913441358866509, 0.031966324826248969},
    {0.056796287968535517, 0.998260243021306, 0.015832525889394634},
    {0.69009850248976412, 0.72290777035061415, 0.034182048330797334},
    {-0.95200192516714155, -0.1607580539774093, 0.26047875644561214},
    {0.84050189268620801, -0.49363018072735332, 0.2233513220600733},
    {-0.30530653042319705, 0.93559460842696474, 0.17734331440272616},
    {-0.4311397140745753, -0.87505052835262831, 0.22001163555021289},
    {0.93941952959315334, 0.3093296139917141, 0.14766901275052707},
    {-0.86830151743485229, 0.46041758210857298, 0.18457552629107835},
    {0.29773033396490944, -0.91890597237938587, 0.25878265429243624},
    {0.38565619977371574, 0.89873697035605149, 0.20866517124647735},
    {-0.82180017681077944, -0.51429429175774966, 0.24524651039141493},
    {0.91331466120723181, -0.15868552838284578, 0.3750669709608892},
    {-0.59588077247434679, 0.72059680332799292, 0.35449450211371947},
    {-0.077308831715885443, -0.92270100736626814, 0.37768531285184859},
    {0.71691693429808079, 0.58445730951067898, 0.38005231570953424},
    {-0.87522381344865785, 0.1450618262226282, 0.46145459467356587},
    {0.57321890697997102, -0.68042029112788582, 0.45656140014474561},
    {0.015501012232616062, 0.89702192994311636, 0.44171413359874601},
    {-0.56962371563318714, -0.64195211068519664, 0.51325072837265706},
    {0.82908435870232899, 0.17333956217296034, 0.53157550953823518},
    {-0.66474185621855986, 0.45038050779594335, 0.59605005057341587},
    {0.19345147291749959, -0.75348305778683333, 0.62836280066077577},
    {0.36859593670735419, 0.72680841508636185, 0.57955721305361996},
    {-0.77135652698081314, -0.25749957647841981, 0.58198202411890032},
    {0.6975065373760615, -0.33192504880590623, 0.63506723446644109},
    {-0.30265104884901378, 0.73363137682130974, 0.60843023065414936},
    {-0.21343241785802844, -0.72220784712546993, 0.65792281352577364},
    {0.57619246919684197, 0.41831998461851627, 0.70214715616429757},
    {-0.59720972656235927, 0.066070703057600655, 0.79935924633220234},
    {0.35714800532363311, -0.45433785339976596, 0.81610196499055376},
    {0.054797675402646774, 0.60456923648577499, 0.7946654975934675},
    {-0.469232794353032, -0.3744688900347623, 0.79974598160902211},
    {0.58149624246951903, -0.019719025353627684, 0.81331007619046092},
    {-0.34307324480537243, 0.412886846710942, 0.84369733940069291},
    {-0.060649315233772351, -0.44323879698366953, 0.89434950070436325},
    {0.30773066748721517, 0.29911605318510615, 0.90323386950160245},
    {-0.25550710291723461, -0.091691786274189294, 0.96244934240129754},
    {0.19977278920972838, -0.11173393355261858, 0.97345074902853945},
    {-0.053170523300677654, 0.21657147188118109, 0.97481777426304184},
};

inline constexpr double kDesign91[91][3] = {
    {0.99911003815794808, -0.029783692024761887, 0.029867429440742055},
    {-0.7099379426969108, 0.70293814577050495, 0.043198156673660587},
    {0.04371912322317606, -0.99787243859275943, 0.048365634096290057},
    {0.61532629703817521, 0.78561480970394548, 0.064675489539088277},
    {-0.97283817488830959, -0.20559426452093893, 0.10638084355783817},
    {0.85516435910872746, -0.51192831078991974, 0.081383803806031357},
    {-0.31188650755601943, 0.94638306492994184, 0.08417779290477187},
    {-0.40752387144499919, -0.90868827195367319, 0.090608601227074342},
    {0.90465563194848653, 0.42274290437715711, 0.053727315051567894},
    {-0.94972134566283339, 0.30428027596721335, 0.07377587173116662},
    {0.50711494106588217, -0.85969428298180817, 0.061320276875938932},
    {0.2084263252734925, 0.97524517018501533, 0.073860171701592287},
    {-0.78581927073239988, -0.61084660842837812, 0.096718636865638488},
    {0.96311446419297264, -0.20601038638556438, 0.17311917734195043},
    {-0.55606965651887175, 0.80312821354523678, 0.21394300574363331},
    {-0.15248536150246395, -0.96712354561943792, 0.20351968463996262},
    {0.75043519607825027, 0.63259246420825066, 0.19150402270952682},
    {-0.97363255975651908, 0.059455760261119081, 0.22023771510288742},
    {0.69369741150539199, -0.67562533462240659, 0.24962834071290849},
    {-0.07672675187756188, 0.97385291516434136, 0.21383055247609822},
    {-0.59206693127414578, -0.77004547630556253, 0.23766933608052013},
    {0.96522364881206746, 0.16758430421874904, 0.20064597866250972},
    {-0.80619073644725947, 0.54189577830535007, 0.23749834088149863},
    {0.25726312658367301, -0.94242267186968687, 0.21367075430763527},
    {0.43898800873574068, 0.86675858636353942, 0.23668350418081083},
    {-0.87219990855874452, -0.41226813007321589, 0.26325331609697084},
    {0.87185560529617079, -0.39138728688188879, 0.29442111877527005},
    {-0.34624110706244721, 0.87716192651887859, 0.33272218207666954},
    {-0.33634651975747698, -0.86556133762217535, 0.37104526605354188},
    {0.84611312865583665, 0.423928623781551, 0.3230744425901122},
    {-0.89191003351243592, 0.27747791773296721, 0.35707491831606208},
    {0.48632519741290903, -0.81058090358683754, 0.32626124670521495},
    {0.16266919457239154, 0.91825082286953152, 0.36104592427639665},
    {-0.71830303665390138, -0.5719859645742672, 0.39607171555644943},
    {0.92430939502233933, -0.070415493141059438, 0.37509172291472692},
    {-0.62970600519376829, 0.66200626427293519, 0.40647023640888952},
    {0.017833010795372094, -0.92372525131725225, 0.38264035830640136},
    {0.59731285152103375, 0.70160080223252286, 0.38855330614278855},
    {-0.90708203383005515, -0.14782251752111705, 0.39414551528141178},
    {0.71069164573353094, -0.52279938486074728, 0.47074216708702621},
    {-0.11853111494365695, 0.88014660401629052, 0.45966545468286463},
    {-0.50437934344998303, -0.72015698774814796, 0.47641934353936383},
    {0.85796565971015226, 0.21532026663614628, 0.4664033764177335},
    {-0.75835152220848145, 0.42108465898252084, 0.49758484576366774},
    {0.25696050489863637, -0.83493600062716911, 0.4866756350783813},
    {0.34627257881373608, 0.78758330905614682, 0.50971348074958212},
    {-0.77239787419975814, -0.33252625284740417, 0.54113567161938125},
    {0.79383323383012161, -0.27764152040707435, 0.54105820667730353},
    {-0.41028406147759133, 0.7350325263908315, 0.53980938676996326},
    {-0.14505495431803889, -0.81936987227025992, 0.55460983821386511},
    {0.69157432693158782, 0.48550489261980528, 0.53479898052572306},
    {-0.8527285654311394, 0.091525439165327127, 0.51427335890880532},
    {0.51320636364801286, -0.67221682133443716, 0.53361388046621205},
    {0.091691561602570568, 0.80566456909197259, 0.58523265428436955},
    {-0.56809294821990741, -0.52303229188098066, 0.63537990512176445},
    {0.77803776837172534, 0.0026813641086128395, 0.6282117805912768},
    {-0.56059376896728286, 0.51356674472537567, 0.64960282088922439},
    {0.095341868912238309, -0.74217364903588212, 0.66339144003302064},
    {0.46917724347884382, 0.59232746922713275, 0.65499685755015202},
    {-0.75120815475442382, -0.090417720158372142, 0.65384321064901818},
    {0.58092893340951934, -0.44098415801172564, 0.68414512108935444},
    {-0.15996819697509898, 0.72558491813741743, 0.6692807352135971},
    {-0.33906125479183252, -0.66738735098233393, 0.66304719986421123},
    {0.70707915288300871, 0.26167232083610475, 0.65693733952827915},
    {-0.6992639353785447, 0.22724073039691972, 0.67778433083657597},
    {0.3411686396993881, -0.62160579050366849, 0.70513133563753816},
    {0.21042851334380647, 0.6501697685650023, 0.73006788233427078},
    {-0.58809702021729215, -0.28225367583905953, 0.75794113048895873},
    {0.6162320575458865, -0.19385449695642309, 0.76333379675115609},
    {-0.32470573471892628, 0.5419414134432734, 0.7751552684693237},
    {-0.1202348391120019, -0.62973281088884736, 0.76745043511209388},
    {0.50018836158215463, 0.36621246147994163, 0.784665556778531},
    {-0.5801371179726994, 0.027053832669446578, 0.81406941625897233},
    {0.36817640894898451, -0.37330686568497856, 0.85152106017754337},
    {-0.014456109750586378, 0.54752690527981762, 0.83666319919402743},
    {-0.36123875795330912, -0.44094483072191054, 0.82162900144285078},
    {0.57191474563210898, 0.084975905124189358, 0.81589988312101425},
    {-0.48405717798381737, 0.31121689320995333, 0.81782192060563375},
    {0.1157268170731542, -0.51655380472406787, 0.84839817929743711},
    {0.27062558461976421, 0.44341812331504749, 0.85448356383547375},
    {-0.39017379374718897, -0.17718930883313933, 0.90353105066077311},
    {0.3952489877794787, -0.1174052661711282, 0.91104019732094388},
    {-0.20857248250418939, 0.34163418499747461, 0.91639707724498487},
    {-0.11880838858927224, -0.38665904732084933, 0.91453777829335936},
    {0.34192448706773243, 0.17998658106639615, 0.9223299169925574},
    {-0.34039533217282714, 0.089946627158940112, 0.93597041731973629},
    {0.1218408115572662, -0.26056832938048879, 0.95773637414631363},
    {0.061777877537725311, 0.29078709371417721, 0.95479126513400625},
    {-0.14635620588319137, -0.13538093245763058, 0.97992441755799686},
    {0.15678097606662686, 0.0031402918503799027, 0.98762840385981732},
    {-0.086823048154651222, 0.088813084685262264, 0.99225702028145091},
};

} // namespace fod::detail
