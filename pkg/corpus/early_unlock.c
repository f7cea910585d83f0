// expect: race
#include <pthread.h>
pthread_mutex_t m;
int g;
void *worker(void *p) {
  pthread_mutex_lock(&m);
  int v = g;
  pthread_mutex_unlock(&m);
  g = v + 1;
  return NULL;
}
int main() {
  pthread_t a, b;
  pthread_create(&a, NULL, worker, NULL);
  pthread_create(&b, NULL, worker, NULL);
  return 0;
}
