// Built bindings are expected in ./pkg (see the README).
import init, { compare, normalize, checkConfig, defaultConfig, sampleCsv } from "./pkg/pesto_wasm.js";

const $ = (id) => document.getElementById(id);

function fmt(x) {
  return x === null || x === undefined ? "–" : Number(x).toFixed(4);
}

function cell(tag, text) {
  const el = document.createElement(tag);
  el.textContent = text;
  return el;
}

function scoreTable(title, candidates, rows) {
  const frag = document.createDocumentFragment();
  frag.append(cell("h3", title));
  const table = document.createElement("table");
  const head = document.createElement("tr");
  head.append(cell("th", ""), ...candidates.map((c) => cell("th", c)));
  table.append(head);
  for (const [label, values] of rows) {
    const tr = document.createElement("tr");
    tr.append(cell("td", label), ...candidates.map((c) => cell("td", values(c))));
    table.append(tr);
  }
  frag.append(table);
  return frag;
}

function rankOf(ranking) {
  const m = new Map(ranking.map((e) => [e.candidate, e.rank]));
  return (c) => m.get(c) ?? "–";
}

function render(result) {
  const out = $("result");
  out.replaceChildren();
  const cands = result.candidates;
  for (const cat of result.categories) {
    const rows = cat.metrics.map((m) => [
      `${m.Header} (${m.direction === "lower_better" ? "−" : "+"})`,
      (c) => `${m.raw[c] ?? "–"} / ${fmt(m.normalized[c])}`,
    ]);
    rows.push(["score", (c) => fmt(cat.scores[c])], ["rank", rankOf(cat.ranking)]);
    out.append(scoreTable(`${cat.name} (weight ${cat.weight})`, cands, rows));
  }
  if (result.overall) {
    out.append(scoreTable("Overall", cands, [
      ["score", (c) => fmt(result.overall.scores[c])],
      ["rank", rankOf(result.overall.ranking)],
    ]));
  }
}

function guarded(fn) {
  return () => {
    $("error").textContent = "";
    try {
      fn();
    } catch (e) {
      $("error").textContent = e.message ?? String(e);
    }
  };
}

function fillCategories() {
  const sel = $("category");
  const keep = sel.value;
  let names = [];
  try {
    names = JSON.parse(checkConfig($("config").value || defaultConfig())).categories.map((c) => c.name);
  } catch {
    return;
  }
  sel.replaceChildren(cell("option", "all + overall"));
  sel.firstChild.value = "";
  for (const n of names) sel.append(cell("option", n));
  sel.value = names.includes(keep) ? keep : "";
}

await init();
$("csv").value = sampleCsv();
$("config").value = defaultConfig();
fillCategories();

$("config").addEventListener("change", fillCategories);
$("compare").addEventListener("click", guarded(() => {
  render(JSON.parse(compare($("csv").value, $("config").value, $("category").value)));
}));
$("check").addEventListener("click", guarded(() => {
  $("config").value = checkConfig($("config").value);
  fillCategories();
}));
$("normalize").addEventListener("click", guarded(() => {
  $("normalized").textContent = normalize($("values").value, $("direction").value);
}));
$("compare").click();
