// Generated by scripts/gen_airy_anchors.py; do not edit by hand.

/// Anchor grid: x = (k + ANCHOR_K_MIN)/4 for k in 0..ANCHOR_COUNT.
pub const ANCHOR_K_MIN: i64 = -40;
pub const ANCHOR_K_MAX: i64 = 40;
pub const ANCHOR_COUNT: usize = 81;

/// (Ai, Ai') at each anchor, nearest-f64 roundings of 50-digit values.
pub const ANCHORS: [(f64, f64); ANCHOR_COUNT] = [
    (0.04024123848644319, 0.99626504413279), // x = -10.0
    (0.25262476259634337, 0.6160957851685245), // x = -9.75
    (0.3191032477191282, -0.10809531881187123), // x = -9.5
    (0.2052398087603554, -0.7550497682678933), // x = -9.25
    (-0.022133721547341403, -0.9756639809263316), // x = -9.0
    (-0.2382300384596355, -0.6738561861206686), // x = -8.75
    (-0.33029023763020887, -0.03231334828463914), // x = -8.5
    (-0.25453632099656065, 0.6085182968874139), // x = -8.25
    (-0.0527050503563862, 0.9355609381983065), // x = -8.0
    (0.17497790079676515, 0.8112327355065283), // x = -7.75
    (0.3217757163806479, 0.3188095066985546), // x = -7.5
    (0.32374057321118616, -0.30022899504735406), // x = -7.25
    (0.18428083525050565, -0.7710081684101265), // x = -7.0
    (-0.03338479058876496, -0.9067040516921281), // x = -6.75
    (-0.2380203019971158, -0.6749524925132022), // x = -6.5
    (-0.3496120516108905, -0.19108625952341715), // x = -6.25
    (-0.3291451736298231, 0.3459354872813429), // x = -6.0
    (-0.18884209899944737, 0.7391656870866844), // x = -5.75
    (0.017781541276574976, 0.8641972177713984), // x = -5.5
    (0.21900944784501322, 0.701566726175189), // x = -5.25
    (0.35076100902411433, 0.32719281855444315), // x = -5.0
    (0.37593203432914213, -0.12709960620642027), // x = -4.75
    (0.2921527810559595, -0.5233625323157477), // x = -4.5
    (0.12778292722826728, -0.759267412057374), // x = -4.25
    (-0.07026553294928951, -0.7906285753685813), // x = -4.0
    (-0.2516127030142227, -0.6324539662611763), // x = -3.75
    (-0.37553382314043193, -0.34344343345404815), // x = -3.5
    (-0.4190132668052308, -0.0024538481879481863), // x = -3.25
    (-0.37881429367765806, 0.3145837692165988), // x = -3.0
    (-0.2684905459125971, 0.5513380742629775), // x = -2.75
    (-0.11232506769296609, 0.6788527342647943), // x = -2.5
    (0.06159865877700528, 0.6950162067015286), // x = -2.25
    (0.22740742820168558, 0.618259020741691), // x = -2.0
    (0.36548325221423156, 0.4786515716673063), // x = -1.75
    (0.4642565777488694, 0.3091869672024104), // x = -1.5
    (0.5200454774352992, 0.13907956335191776), // x = -1.25
    (0.5355608832923521, -0.01016056711664521), // x = -1.0
    (0.5177725751515836, -0.1259905473379542), // x = -0.75
    (0.4757280916105396, -0.20408167033954738), // x = -0.5
    (0.41872461427545293, -0.24638918992017597), // x = -0.25
    (0.3550280538878172, -0.2588194037928068), // x = 0.0
    (0.2911639543485452, -0.24906211200489714), // x = 0.25
    (0.23169360648083348, -0.2249105326646839), // x = 0.5
    (0.17933630547864524, -0.19317520810437647), // x = 0.75
    (0.13529241631288141, -0.1591474412967932), // x = 1.0
    (0.09964454475691667, -0.12648662068538938), // x = 1.25
    (0.07174949700810541, -0.09738201284230132), // x = 1.5
    (0.05056988080579487, -0.07285371376202839), // x = 1.75
    (0.03492413042327438, -0.05309038443365363), // x = 2.0
    (0.023654658557747447, -0.037758570992018514), // x = 2.25
    (0.01572592338047049, -0.026250881035903232), // x = 2.5
    (0.010269209855011988, -0.017864093772294476), // x = 2.75
    (0.006591139357460719, -0.011912976705951319), // x = 3.0
    (0.004160454618117256, -0.007792687926790721), // x = 3.25
    (0.002584098786989635, -0.005004413967952583), // x = 3.5
    (0.0015800717179210132, -0.003157514753239784), // x = 3.75
    (0.0009515638512048018, -0.001958640950204179), // x = 4.0
    (0.0005646398353425014, -0.0011952051345449142), // x = 4.25
    (0.00033025032351430896, -0.0007178665675575089), // x = 4.5
    (0.0001904614592681605, -0.0004245926894565621), // x = 4.75
    (0.00010834442813607442, -0.0002474138908684625), // x = 5.0
    (6.081011452242365e-05, -0.00014209461719726815), // x = 5.25
    (3.368531190859981e-05, -8.046339130556515e-05), // x = 5.5
    (1.8421246197730245e-05, -4.494062122298348e-05), // x = 5.75
    (9.947694360252889e-06, -2.4765200397034955e-05), // x = 6.0
    (5.3058617487520814e-06, -1.3469113451450983e-05), // x = 6.25
    (2.7958823432049136e-06, -7.231931466601793e-06), // x = 6.5
    (1.4558127445788758e-06, -3.834455740949934e-06), // x = 6.75
    (7.492128863997167e-07, -2.008150894738792e-06), // x = 7.0
    (3.8115630183373774e-07, -1.0390462946280257e-06), // x = 7.25
    (1.9172560675134309e-07, -5.312713959720545e-07), // x = 7.5
    (9.537038961641585e-08, -2.6849288679532617e-07), // x = 7.75
    (4.6922076160992316e-08, -1.3414392979067865e-07), // x = 8.0
    (2.2837139444822283e-08, -6.626952666987631e-08), // x = 8.25
    (1.0997009755195506e-08, -3.237725440447602e-08), // x = 8.5
    (5.2401142318917526e-09, -1.5646762027577948e-08), // x = 8.75
    (2.47116843087249e-09, -7.480641389658946e-09), // x = 9.0
    (1.1535041557283402e-09, -3.538763310465635e-09), // x = 9.25
    (5.330263704617492e-10, -1.6566394593740667e-09), // x = 9.5
    (2.438632135722847e-10, -7.675930651861793e-10), // x = 9.75
    (1.1047532552898686e-10, -3.5206336767389237e-10), // x = 10.0
];

