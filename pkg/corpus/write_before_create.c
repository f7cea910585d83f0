// expect: race_free
int g;
void *worker(void *p) {
  g = g + 1;
  return NULL;
}
int main() {
  g = 10;
  create(worker);
  return 0;
}
