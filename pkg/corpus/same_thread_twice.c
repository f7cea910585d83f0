// expect: race
int g;
void *worker(void *p) {
  g = 1;
  return NULL;
}
int main() {
  create(worker);
  create(worker);
  return 0;
}
